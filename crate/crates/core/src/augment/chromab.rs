use super::params::ChromAbParams;
use crate::error::Result;
use crate::imagecore::{warp_affine_rgb, Affine2, Image};
#[cfg(test)]
use crate::imagecore::warp_affine_channel;

/// Per-channel geometric misalignment: red and blue are translated, green
/// is scaled about the center and then translated.
pub fn apply_chromatic_aberration(img: &Image, p: &ChromAbParams) -> Result<Image> {
    p.validate()?;
    let transforms = [
        Affine2::translation(p.r_tx, p.r_ty),
        Affine2::then(Affine2::scale(p.g_scale), Affine2::translation(p.g_tx, p.g_ty)),
        Affine2::translation(p.b_tx, p.b_ty),
    ];
    if transforms.iter().all(|t| *t == Affine2::IDENTITY) {
        return Ok(img.clone());
    }
    warp_affine_rgb(img, &transforms)
}
