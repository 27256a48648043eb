use nalgebra::{Matrix3, Matrix3x4};
use proptest::prelude::*;
use sotifkit::kitti_io::{
    decode_velodyne, encode_velodyne, parse_calib, parse_label_line, serialize_calib,
    serialize_label, BBox2D, CalibrationSet, Dimensions, LabelRecord, Point, PointCloud,
};

const CASES: u32 = 10_000;

/// A value on the two-decimal grid, as a label writer would produce it.
fn centi(lo: i64, hi: i64) -> impl Strategy<Value = f64> {
    (lo..=hi).prop_map(|k| k as f64 / 100.0)
}

fn class_name() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("Car".to_string()),
        Just("Van".to_string()),
        Just("Pedestrian".to_string()),
        "[A-Z][a-z_]{0,12}",
    ]
}

prop_compose! {
    fn label_record()(
        class_name in class_name(),
        truncation in centi(0, 100),
        occlusion in 0i8..=3,
        alpha in centi(-314, 314),
        left in 0i64..=124_200,
        top in 0i64..=37_500,
        w in 0i64..=50_000,
        h in 0i64..=30_000,
        dims in (centi(1, 500), centi(1, 500), centi(1, 2_000)),
        location in (centi(-10_000, 10_000), centi(-500, 500), centi(-1_000, 20_000)),
        rotation_y in centi(-314, 314),
        score in prop::option::of((0i64..=10_000).prop_map(|k| k as f64 / 10_000.0)),
    ) -> LabelRecord {
        LabelRecord {
            class_name,
            truncation,
            occlusion,
            alpha,
            bbox2d: BBox2D {
                left: left as f64 / 100.0,
                top: top as f64 / 100.0,
                right: (left + w) as f64 / 100.0,
                bottom: (top + h) as f64 / 100.0,
            },
            dims: Dimensions { height: dims.0, width: dims.1, length: dims.2 },
            location: [location.0, location.1, location.2],
            rotation_y,
            score,
        }
    }
}

fn point() -> impl Strategy<Value = Point> {
    let coord = -200.0f32..200.0;
    (coord.clone(), coord.clone(), coord, 0.0f32..=1.0)
        .prop_map(|(x, y, z, i)| Point::new(x, y, z, i))
}

fn matrix34() -> impl Strategy<Value = Matrix3x4<f64>> + Clone {
    prop::array::uniform12(-1e3f64..1e3).prop_map(|v| Matrix3x4::from_row_slice(&v))
}

/// Values that survive `%.12e` exactly: 13 significant digits.
fn calib_value() -> impl Strategy<Value = f64> + Clone {
    (-9_999_999_999_999i64..=9_999_999_999_999, -6i32..=3)
        .prop_map(|(m, e)| format!("{m}e{}", e - 12).parse().unwrap())
}

fn exact_matrix34() -> impl Strategy<Value = Matrix3x4<f64>> + Clone {
    prop::collection::vec(calib_value(), 12).prop_map(|v| Matrix3x4::from_row_slice(&v))
}

fn calibration(values: impl Strategy<Value = Matrix3x4<f64>> + Clone) -> impl Strategy<Value = CalibrationSet> {
    (
        [values.clone(), values.clone(), values.clone(), values.clone()],
        values.clone(),
        values.clone(),
        values,
    )
        .prop_map(|(projections, r0, tr_velo, tr_imu)| CalibrationSet {
            projections,
            r0_rect: Matrix3::from_fn(|r, c| r0[(r, c)]),
            tr_velo_to_cam: tr_velo,
            tr_imu_to_velo: tr_imu,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn label_record_round_trips(rec in label_record()) {
        let line = serialize_label(&rec);
        let back = parse_label_line(&line, rec.score.is_some()).unwrap();
        prop_assert_eq!(&back, &rec);
        prop_assert_eq!(serialize_label(&back), line);
    }

    #[test]
    fn label_reserialization_is_stable(rec in label_record(), jitter in -0.004f64..0.004) {
        let mut rec = rec;
        rec.location[0] += jitter;
        rec.dims.length += jitter.abs();
        let line = serialize_label(&rec);
        let back = parse_label_line(&line, rec.score.is_some()).unwrap();
        prop_assert!((back.location[0] - rec.location[0]).abs() <= 0.005 + 1e-9);
        prop_assert_eq!(serialize_label(&back), line);
    }

    #[test]
    fn point_cloud_round_trips(points in prop::collection::vec(point(), 0..64)) {
        let cloud = PointCloud::new(points);
        let bytes = encode_velodyne(&cloud).unwrap();
        prop_assert_eq!(bytes.len(), cloud.len() * 16);
        prop_assert_eq!(decode_velodyne(&bytes).unwrap(), cloud);
    }

    #[test]
    fn calibration_round_trips(calib in calibration(exact_matrix34())) {
        let text = serialize_calib(&calib);
        prop_assert_eq!(parse_calib(&text).unwrap(), calib);
    }

    #[test]
    fn calibration_text_is_stable(calib in calibration(matrix34())) {
        let text = serialize_calib(&calib);
        let back = parse_calib(&text).unwrap();
        for (a, b) in back.projections.iter().zip(&calib.projections) {
            prop_assert!((a - b).abs().max() <= 1e-9);
        }
        prop_assert_eq!(serialize_calib(&back), text);
    }
}

#[test]
fn any_bytes_decode_or_error() {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(2_000));
    runner
        .run(&prop::collection::vec(any::<u8>(), 0..200), |bytes| {
            match decode_velodyne(&bytes) {
                Ok(cloud) => prop_assert_eq!(cloud.len() * 16, bytes.len()),
                Err(_) => {}
            }
            Ok(())
        })
        .unwrap();
}
