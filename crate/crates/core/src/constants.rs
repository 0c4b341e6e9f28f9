//! Fitted constants standing in for the asymptotic `O(.)` terms.
//!
//! Each value is the largest requirement seen over seeds 0..20 of the matching
//! battery in [`crate::calibration`], rounded up. Acceptance re-fits with
//! seeds outside that range and allows at most 10% extra.

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct Constant {
    pub name: &'static str,
    pub value: f64,
    /// The inequality the constant closes.
    pub inequality: &'static str,
}

pub const HEIGHT_PROD_C: Constant = Constant {
    name: "height_prod",
    value: 0.32,
    inequality: "h(P1...Ps) <= h(P1) + ... + h(Ps) + c * deg(P1...Ps)",
};

pub const XI_HEIGHT_C: Constant = Constant {
    name: "xi_height",
    value: 1.29,
    inequality: "h(xi^k P) <= h(P) + c * (deg P + k log(deg P + k))",
};

pub const HEIGHT_DET_C: Constant = Constant {
    name: "height_det",
    value: 0.35,
    inequality: "h(det A) <= rho * h + c * rho * d",
};

pub const POLY_EVAL_C: Constant = Constant {
    name: "poly_eval",
    value: 0.70,
    inequality: "log|P(p)| <= n log d + h(P) + d log+ ||p|| + c",
};

pub const MINOR_DEG_C: Constant = Constant {
    name: "minor_deg",
    value: 0.07,
    inequality: "deg M <= c * d^kappa * mu",
};

pub const MINOR_HEIGHT_C: Constant = Constant {
    name: "minor_height",
    value: 0.35,
    inequality: "h(M) <= c * d^kappa * mu * log mu",
};

pub const MINOR_V_ABS_C: Constant = Constant {
    name: "minor_v_abs",
    value: 0.046,
    inequality: "max_k log|xi^k P(p)| >= log||P|| + log eps - c * d^kappa * mu * (log mu + log+ ||p||)",
};

pub const LOJAS_C: Constant = Constant {
    // negative: on the battery the inequality holds with room to spare; the
    // circle/line example is binding at -log(2)/2
    name: "lojasiewicz",
    value: -0.34,
    inequality: "log eps >= d^n * (n log dist(psi(p), psi(W) u H_inf) - c * (d + h))",
};

pub const ALL: &[Constant] = &[
    HEIGHT_PROD_C,
    XI_HEIGHT_C,
    HEIGHT_DET_C,
    POLY_EVAL_C,
    MINOR_DEG_C,
    MINOR_HEIGHT_C,
    MINOR_V_ABS_C,
    LOJAS_C,
];
