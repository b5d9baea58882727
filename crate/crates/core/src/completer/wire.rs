//! JSON wire format for remote completion. Images travel as base64 PNG,
//! depth maps as base64 PFM.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{CompleterError, CompletionRequest, CompletionResponse, ReferenceImage};
use crate::geometry::{CameraIntrinsics, Pose, Trajectory};
use crate::image::{DepthMap, HoleMask, RgbImage};
use crate::renderer::RenderOutput;

pub const COMPLETE_PATH: &str = "/v1/complete";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireRender {
    pub rgb_png_b64: String,
    pub depth_pfm_b64: String,
    pub mask_png_b64: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireReference {
    pub index: usize,
    pub rgb_png_b64: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireRequest {
    pub request_id: String,
    pub intrinsics: CameraIntrinsics,
    pub poses: Vec<Pose>,
    pub renders: Vec<WireRender>,
    pub references: Vec<WireReference>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireResponse {
    pub request_id: String,
    pub frames: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<String>>,
}

fn protocol<E: std::fmt::Display>(what: &str) -> impl Fn(E) -> CompleterError + '_ {
    move |e| CompleterError::ProtocolError(format!("{what}: {e}"))
}

fn png_b64(img: &RgbImage) -> Result<String, CompleterError> {
    Ok(B64.encode(img.encode_png().map_err(protocol("png encode"))?))
}

fn decode_rgb(s: &str) -> Result<RgbImage, CompleterError> {
    let bytes = B64.decode(s).map_err(protocol("base64"))?;
    RgbImage::decode_png(&bytes).map_err(protocol("png"))
}

fn decode_depth(s: &str) -> Result<DepthMap, CompleterError> {
    let bytes = B64.decode(s).map_err(protocol("base64"))?;
    DepthMap::decode_pfm(&bytes).map_err(protocol("pfm"))
}

fn decode_mask(s: &str) -> Result<HoleMask, CompleterError> {
    let bytes = B64.decode(s).map_err(protocol("base64"))?;
    HoleMask::decode_png(&bytes).map_err(protocol("mask png"))
}

pub fn encode_request(req: &CompletionRequest) -> Result<WireRequest, CompleterError> {
    let renders = req
        .renders
        .iter()
        .map(|r| {
            Ok(WireRender {
                rgb_png_b64: png_b64(&r.rgb)?,
                depth_pfm_b64: B64.encode(r.depth.encode_pfm()),
                mask_png_b64: B64.encode(r.mask.encode_png().map_err(protocol("mask encode"))?),
            })
        })
        .collect::<Result<_, CompleterError>>()?;
    let references = req
        .references
        .iter()
        .map(|r| {
            Ok(WireReference {
                index: r.index,
                rgb_png_b64: png_b64(&r.image)?,
            })
        })
        .collect::<Result<_, CompleterError>>()?;
    Ok(WireRequest {
        request_id: req.request_id.clone(),
        intrinsics: *req.trajectory.intrinsics(),
        poses: req.trajectory.poses().to_vec(),
        renders,
        references,
    })
}

pub fn decode_request(wire: &WireRequest) -> Result<CompletionRequest, CompleterError> {
    let trajectory = Trajectory::new(wire.poses.clone(), wire.intrinsics).map_err(protocol("trajectory"))?;
    let renders = wire
        .renders
        .iter()
        .map(|r| {
            Ok(RenderOutput {
                rgb: decode_rgb(&r.rgb_png_b64)?,
                depth: decode_depth(&r.depth_pfm_b64)?,
                mask: decode_mask(&r.mask_png_b64)?,
            })
        })
        .collect::<Result<Vec<_>, CompleterError>>()?;
    let references = wire
        .references
        .iter()
        .map(|r| {
            Ok(ReferenceImage {
                index: r.index,
                image: decode_rgb(&r.rgb_png_b64)?,
            })
        })
        .collect::<Result<Vec<_>, CompleterError>>()?;
    CompletionRequest::new(wire.request_id.clone(), renders, trajectory, references)
}

pub fn encode_response(request_id: &str, resp: &CompletionResponse) -> Result<WireResponse, CompleterError> {
    Ok(WireResponse {
        request_id: request_id.to_string(),
        frames: resp.frames.iter().map(png_b64).collect::<Result<_, _>>()?,
        depths: resp
            .depths
            .as_ref()
            .map(|ds| ds.iter().map(|d| B64.encode(d.encode_pfm())).collect()),
    })
}

pub fn decode_response(wire: &WireResponse) -> Result<CompletionResponse, CompleterError> {
    Ok(CompletionResponse {
        frames: wire.frames.iter().map(|f| decode_rgb(f)).collect::<Result<_, _>>()?,
        depths: wire
            .depths
            .as_ref()
            .map(|ds| ds.iter().map(|d| decode_depth(d)).collect::<Result<_, _>>())
            .transpose()?,
    })
}

/// The request as the server sees it after the 8-bit PNG round trip.
pub fn quantized_request(req: &CompletionRequest) -> CompletionRequest {
    let mut q = req.clone();
    for r in &mut q.renders {
        r.rgb = r.rgb.quantized();
    }
    for r in &mut q.references {
        r.image = r.image.quantized();
    }
    q
}
