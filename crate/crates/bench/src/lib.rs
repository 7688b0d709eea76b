//! Fixtures shared by the criterion benches in `benches/`.

use ccabc_core::Config;

/// Default configuration on a square field with the base station scaled
/// from the full-size layout.
pub fn square_config(side: usize) -> Config {
    let mut c = Config::default();
    let scale = side as f64 / 150.0;
    c.field.width = side;
    c.field.height = side;
    c.field.bs_x = 50.0 * scale;
    c.field.bs_y = 175.0 * scale;
    c
}
