use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counter-based generator for one `(seed, stream)` pair.
pub type Substream = ChaCha8Rng;

/// Returns the ChaCha8 keystream for `seed` positioned on `stream`.
///
/// The key is derived from `seed` alone; distinct streams share the key and
/// use disjoint nonces, so outputs do not depend on evaluation order.
pub fn substream(seed: u64, stream: u64) -> Substream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Two independent standard normals by the Marsaglia polar method.
///
/// Uniforms come from `Rng::gen::<f64>()`, mapped to `(-1, 1)`.
pub fn normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let scale = (-2.0 * s.ln() / s).sqrt();
            return (u * scale, v * scale);
        }
    }
}
