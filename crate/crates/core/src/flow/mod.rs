//! Flows of step fields as chronological series: Lie series per piece,
//! certified subdivision, point evaluation, operator composition and the
//! literal Picard iteration for cross-checks.

mod certify;
mod eval;
mod lie;
mod operator;
mod picard;

pub use certify::{
    certify, choose_order, tail, CertifyOptions, FlowCertificate, Subinterval, DEFAULT_DOMAIN_LIMIT,
    DEFAULT_MAX_SUBINTERVALS, MAX_SERIES_ORDER,
};
pub use eval::{flow_eval, flow_observable, flow_trajectory, FlowPoint, ObservableValue};
pub use lie::{
    lie_series_apply, lie_series_jet, lie_series_poly, lie_step_point, lie_terms_poly, observable_coeffs,
    trajectory_coeffs, EXPRESSION_NODE_LIMIT, OVERFLOW_GUARD,
};
pub use operator::{FlowOperator, OperatorImage, OperatorStep};
pub use picard::{lie_truncation_symbolic, picard_iterate, PicardPiece, PicardResult, PICARD_TERM_LIMIT};
