mod common;

use proptest::prelude::*;
use spectral_shift::analysis::{delta_entropy, iou};
use spectral_shift::histogram::{
    ChannelHistogram, LEVELS, apply_lut, build_matching_lut, channel_entropy, compute_histogram,
    equalization_lut, quantize, to_cdf,
};
use spectral_shift::transforms::{hsv_to_rgb, rgb_to_hsv};
use spectral_shift::{Image, InverseMode, Lut, Mask};

fn histogram_strategy() -> impl Strategy<Value = ChannelHistogram> {
    prop_oneof![
        prop::collection::vec(0u64..20, LEVELS),
        prop::collection::vec(prop_oneof![9 => Just(0u64), 1 => 1u64..1000], LEVELS),
    ]
    .prop_filter("non-empty", |b| b.iter().any(|&c| c > 0))
    .prop_map(|b| ChannelHistogram::from_bins(b.try_into().unwrap()))
}

fn mode_strategy() -> impl Strategy<Value = InverseMode> {
    prop_oneof![Just(InverseMode::Paper), Just(InverseMode::Conventional)]
}

proptest! {
    #[test]
    fn cdf_satisfies_invariants(h in histogram_strategy()) {
        let cdf = to_cdf(&h).unwrap();
        let v = cdf.values();
        prop_assert_eq!(v[255], 1.0);
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn matching_agrees_with_brute_force_and_is_monotone(
        s in histogram_strategy(),
        t in histogram_strategy(),
        mode in mode_strategy(),
    ) {
        let (s, t) = (to_cdf(&s).unwrap(), to_cdf(&t).unwrap());
        let lut = build_matching_lut(&s, &t, mode);
        prop_assert_eq!(lut.map(), &common::brute_force_matching(&s, &t, mode));
        prop_assert!(lut.is_monotone());
    }

    #[test]
    fn equalization_is_monotone(h in histogram_strategy()) {
        prop_assert!(equalization_lut(&to_cdf(&h).unwrap()).is_monotone());
    }

    #[test]
    fn strictly_increasing_cdf_self_matches_to_identity(
        bins in prop::collection::vec(1u64..50, LEVELS),
        mode in mode_strategy(),
    ) {
        let cdf = to_cdf(&ChannelHistogram::from_bins(bins.try_into().unwrap())).unwrap();
        prop_assert!(cdf.is_strictly_increasing());
        prop_assert!(build_matching_lut(&cdf, &cdf, mode).is_identity());
    }

    #[test]
    fn deterministic_luts_never_add_entropy(
        plane in prop::collection::vec(any::<u8>(), 1..2000),
        map in prop::collection::vec(any::<u8>(), LEVELS),
    ) {
        let lut = Lut::from_map(map.try_into().unwrap());
        let before = channel_entropy(&compute_histogram(&plane).unwrap()).unwrap();
        let after = channel_entropy(&compute_histogram(&apply_lut(&plane, &lut)).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-9);
    }

    #[test]
    fn hsv_round_trip_within_two_levels(r in any::<u8>(), g in any::<u8>(), b in any::<u8>()) {
        let px = [r, g, b].map(|v| v as f64 / 255.0);
        let back = hsv_to_rgb(rgb_to_hsv(px));
        for (orig, out) in [r, g, b].iter().zip(back) {
            prop_assert!(orig.abs_diff(quantize(out)) <= 2);
        }
    }

    #[test]
    fn hue_is_in_unit_interval(r in 0.0f64..=1.0, g in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let [h, s, v] = rgb_to_hsv([r, g, b]);
        prop_assert!((0.0..1.0).contains(&h));
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn iou_symmetric_and_bounded(
        a in prop::collection::vec(0u8..=1, 64),
        b in prop::collection::vec(0u8..=1, 64),
    ) {
        let (a, b) = (Mask::new(8, 8, a).unwrap(), Mask::new(8, 8, b).unwrap());
        let x = iou(&a, &b).unwrap();
        prop_assert_eq!(x, iou(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&x));
    }

    #[test]
    fn delta_entropy_of_lut_maps_is_nonnegative(
        data in prop::collection::vec(any::<u8>(), 3..900),
        maps in prop::collection::vec(any::<u8>(), LEVELS * 3),
    ) {
        let n = data.len() / 3;
        let img = Image::new(n as u32, 1, data[..n * 3].to_vec()).unwrap();
        let luts: [Lut; 3] = std::array::from_fn(|c| {
            Lut::from_map(maps[c * LEVELS..(c + 1) * LEVELS].try_into().unwrap())
        });
        prop_assert!(delta_entropy(&img, &img.map_channels(&luts)).unwrap() >= -3e-9);
    }
}
