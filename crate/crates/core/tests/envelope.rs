use proptest::prelude::*;
use treeuq::envelope::{classify_outcome, envelope_rates, p_min, summarize_folds, EnvelopeOutcome};
use treeuq::ClassPosterior;

fn posterior(c: usize) -> impl Strategy<Value = ClassPosterior> {
    prop::collection::vec(0.0f64..1.0, c).prop_filter_map("all zero", |w| ClassPosterior::from_weights(&w))
}

fn labelled(c: usize) -> impl Strategy<Value = Vec<(ClassPosterior, usize)>> {
    prop::collection::vec((posterior(c), 0..c), 1..60)
}

fn cases() -> impl Strategy<Value = (usize, Vec<(ClassPosterior, usize)>)> {
    (2usize..6).prop_flat_map(|c| (Just(c), labelled(c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rates_partition_and_bound_accuracy((c, set) in cases(), t in 0.0f64..1.0) {
        let p0 = p_min(c).unwrap() + t * (1.0 - p_min(c).unwrap());
        prop_assume!(p0 > p_min(c).unwrap());
        let (ps, ys): (Vec<_>, Vec<_>) = set.into_iter().unzip();
        let s = envelope_rates(&ps, &ys, p0).unwrap();
        prop_assert!((s.rate_correct + s.rate_uncertain + s.rate_incorrect - 1.0).abs() < 1e-12);
        prop_assert!(s.accuracy + 1e-12 >= s.rate_correct);
        prop_assert!(s.accuracy <= 1.0 - s.rate_incorrect + 1e-12);
    }

    #[test]
    fn raising_p0_never_adds_confident_outcomes((c, set) in cases(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let pm = p_min(c).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        let (p_lo, p_hi) = (pm + (1.0 - pm) * lo, pm + (1.0 - pm) * hi);
        prop_assume!(p_lo > pm);
        let (ps, ys): (Vec<_>, Vec<_>) = set.into_iter().unzip();
        let s_lo = envelope_rates(&ps, &ys, p_lo).unwrap();
        let s_hi = envelope_rates(&ps, &ys, p_hi).unwrap();
        prop_assert!(s_hi.rate_correct <= s_lo.rate_correct);
        prop_assert!(s_hi.rate_incorrect <= s_lo.rate_incorrect);
        prop_assert!(s_hi.rate_uncertain >= s_lo.rate_uncertain);
    }

    #[test]
    fn uniform_posterior_is_always_uncertain(c in 2usize..8, y in 0usize..8, t in 0.0f64..1.0) {
        let pm = p_min(c).unwrap();
        let p0 = pm + (1.0 - pm) * t;
        prop_assume!(p0 > pm && y < c);
        prop_assert_eq!(classify_outcome(&ClassPosterior::uniform(c), y, p0).unwrap(), EnvelopeOutcome::Uncertain);
    }

    #[test]
    fn one_hot_correct_is_confident_at_any_level(c in 2usize..8, y in 0usize..8, t in 0.0f64..=1.0) {
        prop_assume!(y < c);
        let pm = p_min(c).unwrap();
        let p0 = pm + (1.0 - pm) * t;
        prop_assume!(p0 > pm);
        let mut v = vec![0.0; c];
        v[y] = 1.0;
        let p = ClassPosterior::new(v).unwrap();
        prop_assert_eq!(classify_outcome(&p, y, p0).unwrap(), EnvelopeOutcome::ConfidentlyCorrect);
    }

    #[test]
    fn cross_fold_widths_are_non_negative(folds in prop::collection::vec(labelled(3), 2..6)) {
        let rates: Vec<_> = folds
            .into_iter()
            .map(|f| {
                let (ps, ys): (Vec<_>, Vec<_>) = f.into_iter().unzip();
                treeuq::envelope::fold_rates(&ps, &ys, 0.9).unwrap()
            })
            .collect();
        let s = summarize_folds(&rates).unwrap();
        let w = s.two_sigma.unwrap();
        prop_assert!(w.correct >= 0.0 && w.uncertain >= 0.0 && w.incorrect >= 0.0);
        prop_assert!((s.rate_correct + s.rate_uncertain + s.rate_incorrect - 1.0).abs() < 1e-12);
    }
}

#[test]
fn p0_of_one_admits_only_certain_outcomes() {
    let ps = vec![
        ClassPosterior::new(vec![1.0, 0.0]).unwrap(),
        ClassPosterior::new(vec![0.999, 0.001]).unwrap(),
    ];
    let s = envelope_rates(&ps, &[0, 0], 1.0).unwrap();
    assert_eq!((s.rate_correct, s.rate_uncertain), (0.5, 0.5));
    assert!(envelope_rates(&ps, &[0, 0], 1.0 + 1e-9).is_err());
}
