use anaflow::expr::{Expression, VectorField};
use anaflow::flow::{certify, flow_eval, CertifyOptions};
use anaflow::geometry::{CompactBox, Polydisc};
use anaflow::oracle::{random_poly, rk4_flow};
use anaflow::timevarying::{StepField, TimeInterval};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn linear(a: f64, t: f64) -> StepField {
    // the grammar has no unary minus
    let text = if a < 0.0 { format!("0 - {}*x1", -a) } else { format!("{a}*x1") };
    let x = VectorField::parse(&[&text]).unwrap();
    StepField::constant(x, TimeInterval::new(0.0, t).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_flow_within_residual(a in -1.0f64..1.0, x0 in -1.0f64..1.0, t in 0.05f64..0.5) {
        let x = linear(a, t);
        let span = x.span();
        let k = CompactBox::point(&[x0]).unwrap();
        let v = Polydisc::new(k.clone(), 0.5).unwrap();
        let c = certify(&x, span, &k, &v, &Expression::var(1, 0), 1e-14, &CertifyOptions::default()).unwrap();
        let p = flow_eval(&x, 0.0, t, &[x0], &c).unwrap();
        let exact = x0 * (a * t).exp();
        prop_assert!((p.point[0] - exact).abs() <= p.residual_bound + 1e-13);
        prop_assert!((p.point[0] - exact).abs() <= 1e-12);
    }

    #[test]
    fn printed_polynomials_parse_back(seed in any::<u64>(), dim in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_poly(&mut rng, dim, 4, 5);
        let e = Expression::from_poly(&p);
        let back = Expression::parse(&e.to_string(), dim).unwrap();
        let pt: Vec<f64> = (0..dim).map(|i| 0.3 - 0.2 * i as f64).collect();
        let (u, w) = (e.eval_real(&pt, 0.0).unwrap(), back.eval_real(&pt, 0.0).unwrap());
        prop_assert!((u - w).abs() <= 1e-12 * (1.0 + u.abs()));
    }

    #[test]
    fn rk4_splits_at_intermediate_times(a in -1.0f64..1.0, x0 in -1.0f64..1.0) {
        let x = linear(a, 1.0);
        let whole = rk4_flow(&x, 0.0, 1.0, &[x0], 400).unwrap();
        let half = rk4_flow(&x, 0.0, 0.5, &[x0], 200).unwrap();
        let rest = rk4_flow(&x, 0.5, 1.0, &half, 200).unwrap();
        prop_assert!((whole[0] - rest[0]).abs() <= 1e-12);
    }
}
