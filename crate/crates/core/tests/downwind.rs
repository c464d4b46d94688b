//! Downwind-point error of L2-initialized runs against closed-form limits.

use dgsuper::presets::{build, Preset, PresetParams};
use dgsuper::symbol::{c_k, ratio_to};
use dgsuper::Grid;

/// `max_j |e_j^-/h^{2k+1} - limit_j|` for the e_0 limit with `κ = k` and with `κ = k + 1`.
fn deviations(k: usize, n: usize) -> (f64, f64) {
    let p = build::<f64>(Preset::Ex1, &PresetParams::new(k)).unwrap();
    let (_, dec) = p.solve(n, k).unwrap();
    let grid = Grid::<f64>::new(n).unwrap();
    let g = p.initial[0].as_ref();
    let scale = grid.h().powi(2 * k as i32 + 1);
    let ck: f64 = ratio_to(&c_k(k));
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut stated: f64 = 0.0;
    let mut shifted: f64 = 0.0;
    for (j, e) in dec.downwind(0).iter().enumerate() {
        // Both limits are evaluated at x_{j+1/2}, where e^- is sampled.
        let x = grid.interface(j + 1) - 1.0;
        let at_face = sign * ck * (k as f64 * g.derivative(2 * k + 1, x) - g.derivative(2 * k + 2, x));
        let extra = sign * ck * g.derivative(2 * k + 1, x);
        stated = stated.max((e / scale - at_face).abs());
        shifted = shifted.max((e / scale - at_face - extra).abs());
    }
    (stated, shifted)
}

#[test]
fn downwind_limit_carries_one_more_g_2k1_term() {
    for k in [1, 2] {
        let coarse = deviations(k, 40);
        let fine = deviations(k, 160);
        // With κ + 1 the deviation vanishes under refinement; with κ a
        // residual of size C_k max|g^{(2k+1)}| remains.
        assert!(fine.1 < 0.5 * coarse.1, "k={k}: {coarse:?} -> {fine:?}");
        assert!(fine.1 < 0.2 * fine.0, "k={k}: {fine:?}");
    }
}
