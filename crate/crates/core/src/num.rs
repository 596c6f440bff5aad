/// Shortest round-trip text for a float, switching to exponent notation for
/// very small or very large magnitudes so tables stay readable.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}
