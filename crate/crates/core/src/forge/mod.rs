//! Hard-instance families and the codes that index them.

mod codes;
mod families;

pub use codes::{
    default_inner_count, default_outer_count, gv_inner_code, gv_inner_code_with, gv_outer_code, gv_outer_code_with,
    hamming, CodeBook, CodeLimits,
};
pub use families::{
    fast_alpha, fast_delta, fast_instance, forge, forge_appendix_a, forge_fast_family, forge_slow_family,
    forge_vk_family, slow_alpha, slow_delta, slow_instance, vk_default_delta, vk_instance, Enumeration, Family,
    FamilySpec, ForgedFamily, PairDistance, VK_ETA,
};
