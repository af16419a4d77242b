/// Labels of the 24-channel cap used by default.
pub const STANDARD_24: [&str; 24] = [
    "Fp1", "Fp2", "F7", "Fz", "F8", "FC5", "FC1", "FC2", "FC6", "T7", "C3", "Cz", "C4", "T8",
    "CP5", "CP1", "CPz", "CP2", "CP6", "P3", "Pz", "P4", "O1", "O2",
];

/// Approximate 10-20 position as (polar angle from Cz, azimuth from nose
/// towards the left ear), both in degrees.
fn angles(label: &str) -> Option<(f64, f64)> {
    let a = match label {
        "Fp1" => (72.0, 18.0),
        "Fp2" => (72.0, -18.0),
        "F7" => (72.0, 54.0),
        "F3" => (46.0, 39.0),
        "Fz" => (36.0, 0.0),
        "F4" => (46.0, -39.0),
        "F8" => (72.0, -54.0),
        "FC5" => (54.0, 69.0),
        "FC1" => (25.0, 45.0),
        "FC2" => (25.0, -45.0),
        "FC6" => (54.0, -69.0),
        "T7" => (72.0, 90.0),
        "C3" => (36.0, 90.0),
        "Cz" => (0.0, 0.0),
        "C4" => (36.0, -90.0),
        "T8" => (72.0, -90.0),
        "CP5" => (54.0, 111.0),
        "CP1" => (25.0, 135.0),
        "CPz" => (18.0, 180.0),
        "CP2" => (25.0, -135.0),
        "CP6" => (54.0, -111.0),
        "P7" => (72.0, 126.0),
        "P3" => (46.0, 141.0),
        "Pz" => (36.0, 180.0),
        "P4" => (46.0, -141.0),
        "P8" => (72.0, -126.0),
        "O1" => (72.0, 162.0),
        "Oz" => (72.0, 180.0),
        "O2" => (72.0, -162.0),
        "TP9" => (108.0, 108.0),
        "TP10" => (108.0, -108.0),
        "AFz" => (54.0, 0.0),
        "FCz" => (18.0, 0.0),
        _ => return None,
    };
    Some(a)
}

/// Unit-sphere position (x to the nose, y to the left ear, z to the vertex).
pub fn standard_position(label: &str) -> Option<[f64; 3]> {
    angles(label).map(|(theta, phi)| {
        let (t, p) = (theta.to_radians(), phi.to_radians());
        [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
    })
}

pub fn standard_24_positions() -> Vec<[f64; 3]> {
    STANDARD_24
        .iter()
        .map(|l| standard_position(l).expect("known label"))
        .collect()
}
