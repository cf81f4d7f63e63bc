//! Maximal-function experiments, the two-radius oscillatory integral, the
//! low/high frequency decomposition checks and the sharpness sweep.

pub mod decomposition;
pub mod maximal;
pub mod oscillatory;
pub mod sharpness;
