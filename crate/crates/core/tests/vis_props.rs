mod common;

use common::processing::{random_bin_spec, random_filters};
use common::random_frame;
use luxen_core::aggregate::Aggregation;
use luxen_core::metadata::compute_metadata;
use luxen_core::vis::{pearson, process_vis, to_spec_doc};
use luxen_core::{Transform, Vis};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bin_counts_conserve_rows_and_match_nested_loops(seed in any::<u64>()) {
        common::processing::check_bins(seed)?;
    }

    #[test]
    fn group_by_matches_nested_loops(seed in any::<u64>(), agg in prop::sample::select(Aggregation::ALL.to_vec())) {
        common::processing::check_group_by(seed, agg)?;
    }

    #[test]
    fn filtering_first_gives_the_same_vis(seed in any::<u64>()) {
        let f = random_frame(seed, 100, 6);
        let meta = compute_metadata(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let Some(mut spec) = random_bin_spec(&f, &mut rng) else { return Ok(()) };
        let filters = random_filters(&f, &mut rng);
        let Some(first) = filters.first().cloned() else { return Ok(()) };
        spec.filters = vec![first.clone()];
        let direct = process_vis(&spec, &f, &meta).unwrap();
        let pre = f.transform(&Transform::Filter(first)).unwrap();
        spec.filters.clear();
        let after = process_vis(&spec, &pre, &meta).unwrap();
        prop_assert_eq!(serde_json::to_string(&direct).unwrap(), serde_json::to_string(&after).unwrap());
    }

    #[test]
    fn pearson_is_symmetric_and_affine_invariant(
        xy in prop::collection::vec((-1000.0f64..1000.0, -1000.0f64..1000.0, any::<bool>()), 2..80),
        a in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
        b in -100.0f64..100.0,
    ) {
        let x: Vec<f64> = xy.iter().map(|t| if t.2 && xy.len() > 3 { f64::NAN } else { t.0 }).collect();
        let y: Vec<f64> = xy.iter().map(|t| t.1).collect();
        let r = pearson(&x, &y);
        prop_assert_eq!(r, pearson(&y, &x));
        let scaled: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        match (r, pearson(&scaled, &y)) {
            (Some(r), Some(s)) => prop_assert!((s - a.signum() * r).abs() <= 1e-12, "{} vs {}", s, r),
            (None, None) => {}
            (r, s) => prop_assert!(false, "definedness differs: {:?} {:?}", r, s),
        }
    }

    #[test]
    fn equal_vises_give_byte_equal_documents(seed in any::<u64>()) {
        let f = random_frame(seed, 80, 6);
        let meta = compute_metadata(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(spec) = random_bin_spec(&f, &mut rng) else { return Ok(()) };
        let mut vis = Vis::new(spec.clone(), f.version());
        vis.data = Some(process_vis(&spec, &f, &meta).unwrap());
        let again = {
            let mut v = Vis::new(spec.clone(), f.version());
            v.data = Some(process_vis(&spec, &f.uncached(), &compute_metadata(&f)).unwrap());
            v
        };
        let a = serde_json::to_string(&to_spec_doc(&vis)).unwrap();
        prop_assert_eq!(&a, &serde_json::to_string(&to_spec_doc(&again)).unwrap());
        prop_assert_eq!(&a, &serde_json::to_string(&to_spec_doc(&vis.clone())).unwrap());
    }
}
