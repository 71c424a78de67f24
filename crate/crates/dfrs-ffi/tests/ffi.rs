//! Exercises the C ABI from Rust: status codes, null handling, error
//! messages, ownership pairing, and agreement with the core library.

use std::os::raw::c_char;
use std::ptr;

use dfrs_ffi::*;

fn last_error_string() -> String {
    unsafe {
        let needed = dfrs_last_error(ptr::null_mut(), 0);
        let mut buf = vec![0u8; needed + 1];
        let written = dfrs_last_error(buf.as_mut_ptr() as *mut c_char, buf.len());
        assert_eq!(written, needed);
        buf.truncate(needed);
        String::from_utf8(buf).unwrap()
    }
}

fn make_constant_field(d: usize, values: &[f64], range: f64) -> *mut DfrsField {
    let mut field = ptr::null_mut();
    let status = unsafe {
        dfrs_field_constant_new(d, values.len(), range, values.as_ptr(), values.len(), &mut field)
    };
    assert_eq!(status, DfrsStatus::Ok);
    assert!(!field.is_null());
    field
}

#[test]
fn version_is_a_c_string() {
    let p = dfrs_version();
    assert!(!p.is_null());
    let s = unsafe { std::ffi::CStr::from_ptr(p) }.to_str().unwrap();
    assert_eq!(s, env!("CARGO_PKG_VERSION"));
}

#[test]
fn field_lifecycle_and_eval_matches_inputs() {
    let field = make_constant_field(2, &[0.25, -0.5], 1.0);
    let x = [0.3, 0.7];
    let mut v = f64::NAN;
    let status = unsafe { dfrs_field_eval(field, x.as_ptr(), 2, 2, &mut v) };
    assert_eq!(status, DfrsStatus::Ok);
    assert_eq!(v, -0.5);
    unsafe { dfrs_field_free(field) };
}

#[test]
fn null_arguments_are_rejected_not_crashed() {
    let mut v = 0.0;
    let status = unsafe { dfrs_field_eval(ptr::null(), ptr::null(), 0, 1, &mut v) };
    assert_eq!(status, DfrsStatus::NullArgument);
    assert!(last_error_string().contains("field"));

    let field = make_constant_field(1, &[0.0], 1.0);
    let status = unsafe { dfrs_field_eval(field, ptr::null(), 1, 1, &mut v) };
    assert_eq!(status, DfrsStatus::NullArgument);
    assert!(last_error_string().contains('x'));
    unsafe { dfrs_field_free(field) };

    // Freeing null is a no-op for every handle type.
    unsafe {
        dfrs_field_free(ptr::null_mut());
        dfrs_partition_free(ptr::null_mut());
        dfrs_deployment_free(ptr::null_mut());
        dfrs_noise_free(ptr::null_mut());
        dfrs_threshold_free(ptr::null_mut());
        dfrs_estimate_free(ptr::null_mut());
    }
}

#[test]
fn invalid_model_parameters_map_to_statuses_with_messages() {
    // Out-of-range field values.
    let mut field = ptr::null_mut();
    let values = [2.0];
    let status =
        unsafe { dfrs_field_constant_new(1, 1, 1.0, values.as_ptr(), 1, &mut field) };
    assert_eq!(status, DfrsStatus::OutOfRange);
    assert!(!last_error_string().is_empty());
    assert!(field.is_null());

    // Zero-dimensional partition.
    let mut partition = ptr::null_mut();
    let status = unsafe { dfrs_partition_new(0, 1, 1, &mut partition) };
    assert_eq!(status, DfrsStatus::InvalidArgument);

    // Bad snapshot index is a shape error.
    let f = make_constant_field(1, &[0.0], 1.0);
    let x = [0.5];
    let mut v = 0.0;
    let status = unsafe { dfrs_field_eval(f, x.as_ptr(), 1, 7, &mut v) };
    assert_eq!(status, DfrsStatus::DimensionMismatch);
    unsafe { dfrs_field_free(f) };
}

#[test]
fn last_error_truncates_and_reports_full_length() {
    let mut field = ptr::null_mut();
    let values = [2.0];
    let status =
        unsafe { dfrs_field_constant_new(1, 1, 1.0, values.as_ptr(), 1, &mut field) };
    assert_eq!(status, DfrsStatus::OutOfRange);
    let full = last_error_string();
    assert!(full.len() > 4);
    let mut small = [0i8; 5];
    let needed = unsafe { dfrs_last_error(small.as_mut_ptr() as *mut c_char, small.len()) };
    assert_eq!(needed, full.len());
    let got: Vec<u8> = small[..4].iter().map(|&b| b as u8).collect();
    assert_eq!(&got, full[..4].as_bytes());
    assert_eq!(small[4], 0, "must be NUL terminated");
}

#[test]
fn full_pipeline_through_the_abi_matches_the_core_library() {
    unsafe {
        let field = make_constant_field(1, &[0.4], 1.0);
        let mut partition = ptr::null_mut();
        assert_eq!(dfrs_partition_new(1, 2, 1, &mut partition), DfrsStatus::Ok);
        let mut deployment = ptr::null_mut();
        assert_eq!(dfrs_deploy_grid(partition, 50, &mut deployment), DfrsStatus::Ok);

        let mut count = 0usize;
        assert_eq!(
            dfrs_deployment_sensor_count(deployment, &mut count),
            DfrsStatus::Ok
        );
        assert_eq!(count, 100);

        let mut pos = [f64::NAN];
        assert_eq!(
            dfrs_deployment_position(deployment, 7, pos.as_mut_ptr(), 1),
            DfrsStatus::Ok
        );
        assert!((0.0..1.0).contains(&pos[0]));
        assert_eq!(
            dfrs_deployment_position(deployment, 100, pos.as_mut_ptr(), 1),
            DfrsStatus::OutOfRange
        );

        let mut noise = ptr::null_mut();
        assert_eq!(
            dfrs_noise_new(
                DfrsNoiseFamily::Uniform,
                0.0,
                0.0,
                0.5,
                DfrsCorrelation::IidPerSnapshot,
                &mut noise
            ),
            DfrsStatus::Ok
        );
        let mut threshold = ptr::null_mut();
        assert_eq!(
            dfrs_threshold_new(1.5, DfrsCorrelation::IidPerSnapshot, &mut threshold),
            DfrsStatus::Ok
        );

        let mut estimate = ptr::null_mut();
        assert_eq!(
            dfrs_estimate_direct(field, deployment, noise, threshold, 42, &mut estimate),
            DfrsStatus::Ok
        );

        // Same draws as the pure-Rust path: values must agree bit for bit.
        let core_field = dfrs_core::fields::FieldModel::new(
            1,
            1,
            1.0,
            dfrs_core::fields::FieldKind::Constant { values: vec![0.4] },
        )
        .unwrap();
        let core_partition = dfrs_core::geometry::CellPartition::new(1, 2, 1).unwrap();
        let core_dep = dfrs_core::geometry::deploy_grid(&core_partition, 50).unwrap();
        let core_noise = dfrs_core::sensing::NoiseModel::new(
            dfrs_core::sensing::NoiseFamily::Uniform,
            0.5,
            dfrs_core::sensing::CorrelationMode::IidPerSnapshot,
        )
        .unwrap();
        let core_thr = dfrs_core::sensing::ThresholdModel::new(
            1.5,
            dfrs_core::sensing::CorrelationMode::IidPerSnapshot,
        )
        .unwrap();
        let core_est = dfrs_core::reconstruction::estimate_direct(
            &core_field,
            &core_dep,
            &core_noise,
            &core_thr,
            42,
        )
        .unwrap();

        for j in 1..=2usize {
            let mut v = f64::NAN;
            assert_eq!(dfrs_estimate_value(estimate, 1, j, &mut v), DfrsStatus::Ok);
            assert_eq!(v, core_est.value(1, j));
        }
        let mut v = f64::NAN;
        let x = [0.75];
        assert_eq!(
            dfrs_estimate_evaluate(estimate, x.as_ptr(), 1, 1, &mut v),
            DfrsStatus::Ok
        );
        assert_eq!(v, core_est.evaluate(&[0.75], 1).unwrap());

        // Index validation on the estimate accessors.
        assert_eq!(
            dfrs_estimate_value(estimate, 0, 1, &mut v),
            DfrsStatus::OutOfRange
        );
        assert_eq!(
            dfrs_estimate_value(estimate, 1, 3, &mut v),
            DfrsStatus::OutOfRange
        );

        dfrs_estimate_free(estimate);
        dfrs_threshold_free(threshold);
        dfrs_noise_free(noise);
        dfrs_deployment_free(deployment);
        dfrs_partition_free(partition);
        dfrs_field_free(field);
    }
}

#[test]
fn analysis_entry_points_match_core_values() {
    unsafe {
        // Pointwise guarantee for a constant field: variance term only.
        let field = make_constant_field(1, &[0.0], 1.0);
        let x = [0.5];
        let (mut local, mut global) = (f64::NAN, f64::NAN);
        assert_eq!(
            dfrs_pointwise_mse_bound(field, 3, 2, 24, 1.0, x.as_ptr(), 1, 1, &mut local, &mut global),
            DfrsStatus::Ok
        );
        assert_eq!(local, 3.0 * 2.0 * 1.0 / 24.0);
        assert_eq!(local, global);

        // Best supercell count for a constant field is always 1.
        let mut l = 0usize;
        assert_eq!(
            dfrs_optimal_supercells(1_000, field, 1, 1.0, &mut l),
            DfrsStatus::Ok
        );
        assert_eq!(l, 1);
        dfrs_field_free(field);

        // Occupancy bound agrees with the core function.
        let (mut prob, mut div) = (f64::NAN, f64::NAN);
        assert_eq!(
            dfrs_sanov_bound(100, 2, 1, 0.5, &mut prob, &mut div),
            DfrsStatus::Ok
        );
        let core = dfrs_core::geometry::sanov_bound(100, 2, 1, 0.5).unwrap();
        assert_eq!(prob, core.probability);
        assert_eq!(div, core.divergence);

        // Quantizer equivalence smoke run.
        let (mut dev, mut tol) = (f64::NAN, f64::NAN);
        assert_eq!(
            dfrs_equivalence_max_deviation(2.0, 5, 20_000, 9, &mut dev, &mut tol),
            DfrsStatus::Ok
        );
        assert!((tol - 4.0 * (0.25f64 / 20_000.0).sqrt()).abs() < 1e-15);
        assert!(dev < tol);

        // Cramer-Rao: regular family succeeds, irregular one reports it.
        let mut noise = ptr::null_mut();
        assert_eq!(
            dfrs_noise_new(
                DfrsNoiseFamily::RaisedCosine,
                0.0,
                0.0,
                1.0,
                DfrsCorrelation::IidPerSnapshot,
                &mut noise
            ),
            DfrsStatus::Ok
        );
        let mut crb = f64::NAN;
        assert_eq!(dfrs_cramer_rao_bound(noise, 100, &mut crb), DfrsStatus::Ok);
        let expect = 1.0 / (std::f64::consts::PI * std::f64::consts::PI * 100.0);
        assert!((crb - expect).abs() / expect < 1e-5);
        dfrs_noise_free(noise);

        let mut uniform = ptr::null_mut();
        assert_eq!(
            dfrs_noise_new(
                DfrsNoiseFamily::Uniform,
                0.0,
                0.0,
                1.0,
                DfrsCorrelation::IidPerSnapshot,
                &mut uniform
            ),
            DfrsStatus::Ok
        );
        assert_eq!(
            dfrs_cramer_rao_bound(uniform, 100, &mut crb),
            DfrsStatus::NonRegularPdf
        );
        dfrs_noise_free(uniform);
    }
}

#[test]
fn iid_deployment_is_seed_reproducible_through_the_abi() {
    unsafe {
        let mut partition = ptr::null_mut();
        assert_eq!(dfrs_partition_new(2, 2, 1, &mut partition), DfrsStatus::Ok);
        let deploy = |seed: u64| -> Vec<f64> {
            let mut dep = ptr::null_mut();
            assert_eq!(
                dfrs_deploy_iid_uniform(partition, 10, seed, &mut dep),
                DfrsStatus::Ok
            );
            let mut out = Vec::new();
            let mut buf = [0.0f64; 2];
            for i in 0..10 {
                assert_eq!(
                    dfrs_deployment_position(dep, i, buf.as_mut_ptr(), 2),
                    DfrsStatus::Ok
                );
                out.extend_from_slice(&buf);
            }
            dfrs_deployment_free(dep);
            out
        };
        assert_eq!(deploy(7), deploy(7));
        assert_ne!(deploy(7), deploy(8));
        dfrs_partition_free(partition);
    }
}

#[test]
fn divisibility_violation_maps_to_its_status() {
    unsafe {
        // T = 2 snapshots with M = 3 subcells cannot be scheduled.
        let values = [0.0, 0.0];
        let mut field = ptr::null_mut();
        assert_eq!(
            dfrs_field_constant_new(1, 2, 1.0, values.as_ptr(), 2, &mut field),
            DfrsStatus::Ok
        );
        let mut partition = ptr::null_mut();
        assert_eq!(dfrs_partition_new(1, 1, 3, &mut partition), DfrsStatus::Ok);
        let mut deployment = ptr::null_mut();
        assert_eq!(dfrs_deploy_grid(partition, 4, &mut deployment), DfrsStatus::Ok);
        let mut noise = ptr::null_mut();
        assert_eq!(
            dfrs_noise_new(
                DfrsNoiseFamily::Zero,
                0.0,
                0.0,
                0.0,
                DfrsCorrelation::IidPerSnapshot,
                &mut noise
            ),
            DfrsStatus::Ok
        );
        let mut threshold = ptr::null_mut();
        assert_eq!(
            dfrs_threshold_new(1.0, DfrsCorrelation::IidPerSnapshot, &mut threshold),
            DfrsStatus::Ok
        );
        let mut estimate = ptr::null_mut();
        assert_eq!(
            dfrs_estimate_direct(field, deployment, noise, threshold, 1, &mut estimate),
            DfrsStatus::Divisibility
        );
        assert!(estimate.is_null());
        assert!(last_error_string().contains("divisible"));
        dfrs_threshold_free(threshold);
        dfrs_noise_free(noise);
        dfrs_deployment_free(deployment);
        dfrs_partition_free(partition);
        dfrs_field_free(field);
    }
}
