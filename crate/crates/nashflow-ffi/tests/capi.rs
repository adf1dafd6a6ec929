//! Exercises the C entry points from Rust, the same way a C caller would:
//! raw pointers, flat buffers, explicit frees.

use nashflow_ffi::*;
use std::ffi::CStr;
use std::ptr;

unsafe fn last_error_string() -> String {
    CStr::from_ptr(nf_last_error()).to_string_lossy().into_owned()
}

#[test]
fn benchmark_game_evaluates_like_the_library() {
    unsafe {
        let mut game: *mut nf_game = ptr::null_mut();
        assert_eq!(nf_game_appendix_b(&mut game), nf_status::NF_OK);
        assert_eq!(nf_game_num_players(game), 2);
        assert_eq!(nf_game_action_count(game, 0), 2);
        assert_eq!(nf_game_action_count(game, 1), 2);
        assert_eq!(nf_game_is_zero_sum(game), 1);

        // Pure profile ((1,0),(1,0)): player 1 pays 3.
        let pure = [1.0, 0.0, 1.0, 0.0];
        let mut cost = 0.0;
        assert_eq!(
            nf_expected_cost(game, pure.as_ptr(), pure.len(), 0, &mut cost),
            nf_status::NF_OK
        );
        assert_eq!(cost, 3.0);

        // Equilibrium ((1/2,1/2),(2/3,1/3)): gap 0, gradient (2,2).
        let eq = [0.5, 0.5, 2.0 / 3.0, 1.0 / 3.0];
        let mut gap = f64::NAN;
        assert_eq!(nf_nash_gap(game, eq.as_ptr(), eq.len(), &mut gap), nf_status::NF_OK);
        assert!(gap.abs() < 1e-12, "gap {gap}");
        let mut grad = [0.0; 2];
        assert_eq!(
            nf_own_gradient(game, eq.as_ptr(), eq.len(), 0, grad.as_mut_ptr(), 2),
            nf_status::NF_OK
        );
        assert!((grad[0] - 2.0).abs() < 1e-15 && (grad[1] - 2.0).abs() < 1e-15);

        let mut action = usize::MAX;
        assert_eq!(
            nf_best_response(game, eq.as_ptr(), eq.len(), 0, &mut action),
            nf_status::NF_OK
        );
        assert_eq!(action, 0); // tie broken toward the lowest index

        nf_game_free(game);
    }
}

#[test]
fn constructing_from_flat_buffers_matches_loading() {
    unsafe {
        let counts = [2usize, 2];
        let costs = [3.0, 0.0, 1.0, 4.0, -3.0, 0.0, -1.0, -4.0];
        let mut game: *mut nf_game = ptr::null_mut();
        assert_eq!(
            nf_game_new(2, counts.as_ptr(), costs.as_ptr(), costs.len(), &mut game),
            nf_status::NF_OK
        );
        assert_eq!(nf_game_is_zero_sum(game), 1);
        nf_game_free(game);

        // Wrong buffer size is a dimension error with a message.
        let mut bad: *mut nf_game = ptr::null_mut();
        assert_eq!(
            nf_game_new(2, counts.as_ptr(), costs.as_ptr(), 7, &mut bad),
            nf_status::NF_ERR_DIMENSION
        );
        assert!(last_error_string().contains("expected 8"));
        assert!(bad.is_null());
    }
}

#[test]
fn projection_round_trips_through_the_abi() {
    unsafe {
        let v = [1.2, -0.3];
        let mut out = [0.0; 2];
        assert_eq!(nf_simplex_project(v.as_ptr(), 2, out.as_mut_ptr()), nf_status::NF_OK);
        let direct = nashflow::simplex_project(&v).unwrap();
        assert_eq!(out.to_vec(), direct.probs().to_vec());
    }
}

#[test]
fn integration_produces_a_consumable_trajectory() {
    unsafe {
        let mut game: *mut nf_game = ptr::null_mut();
        assert_eq!(nf_game_appendix_b(&mut game), nf_status::NF_OK);

        let mut cfg = nf_flow_config {
            scheme: nf_scheme::NF_SCHEME_PROJECTED_EULER,
            h: 0.0,
            t_max: 0.0,
            gap_tol: 0.0,
            record_every: 0,
            inner_tol: 0.0,
            inner_max: 0,
        };
        assert_eq!(nf_flow_config_default(game, &mut cfg), nf_status::NF_OK);
        assert!((cfg.h - 0.0125).abs() < 1e-15); // 0.1 / (Lipschitz bound 8)
        cfg.t_max = 2.0;
        cfg.gap_tol = 0.0;
        cfg.record_every = 10;

        let mut result: *mut nf_flow_result = ptr::null_mut();
        assert_eq!(
            nf_integrate(game, ptr::null(), 0, &cfg, &mut result),
            nf_status::NF_OK
        );
        let len = nf_flow_result_len(result);
        assert!(len >= 2);
        assert_eq!(nf_flow_result_strategy_len(result), 4);
        assert_eq!(nf_flow_result_stop_reason(result), 1); // horizon exhausted

        let mut t0 = f64::NAN;
        let mut t_last = f64::NAN;
        assert_eq!(nf_flow_result_time(result, 0, &mut t0), nf_status::NF_OK);
        assert_eq!(nf_flow_result_time(result, len - 1, &mut t_last), nf_status::NF_OK);
        assert_eq!(t0, 0.0);
        assert!((t_last - 2.0).abs() < 1e-9);

        let mut state = [0.0; 4];
        let mut cesaro = [0.0; 4];
        assert_eq!(
            nf_flow_result_state(result, len - 1, state.as_mut_ptr(), 4),
            nf_status::NF_OK
        );
        assert_eq!(
            nf_flow_result_cesaro(result, len - 1, cesaro.as_mut_ptr(), 4),
            nf_status::NF_OK
        );
        for pair in [&state[0..2], &state[2..4], &cesaro[0..2], &cesaro[2..4]] {
            let sum: f64 = pair.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "simplex sum {sum}");
        }

        let mut gap = f64::NAN;
        assert_eq!(nf_flow_result_gap(result, len - 1, &mut gap), nf_status::NF_OK);
        assert!(gap.is_finite() && gap >= 0.0);

        // Out-of-range record index is rejected.
        assert_eq!(
            nf_flow_result_time(result, len, &mut t0),
            nf_status::NF_ERR_INVALID_INPUT
        );

        nf_flow_result_free(result);
        nf_game_free(game);
    }
}

#[test]
fn monotonicity_checks_report_verdicts() {
    unsafe {
        let mut game: *mut nf_game = ptr::null_mut();
        assert_eq!(nf_game_appendix_b(&mut game), nf_status::NF_OK);

        let mut verdict = -1;
        let mut margin = f64::NAN;
        assert_eq!(
            nf_pure_monotonicity(game, 1_000_000, 1e-9, 0, &mut verdict, &mut margin),
            nf_status::NF_OK
        );
        assert_eq!(verdict, 0); // certified-exhaustive
        assert_eq!(margin, 0.0);

        assert_eq!(
            nf_variational_monotonicity(game, 200, 1e-9, 0, &mut verdict, &mut margin),
            nf_status::NF_OK
        );
        assert_eq!(verdict, 1); // certified-sampled
        assert!(margin >= -1e-12);

        nf_game_free(game);
    }
}

#[test]
fn error_paths_set_status_and_message() {
    unsafe {
        // NULL handle.
        let mut gap = 0.0;
        let profile = [0.5, 0.5, 0.5, 0.5];
        assert_eq!(
            nf_nash_gap(ptr::null(), profile.as_ptr(), 4, &mut gap),
            nf_status::NF_ERR_NULL
        );
        assert!(!last_error_string().is_empty());

        // Wrong profile length.
        let mut game: *mut nf_game = ptr::null_mut();
        assert_eq!(nf_game_appendix_b(&mut game), nf_status::NF_OK);
        assert_eq!(
            nf_nash_gap(game, profile.as_ptr(), 3, &mut gap),
            nf_status::NF_ERR_DIMENSION
        );
        assert!(last_error_string().contains("expects 4"));

        // Entries that are not a distribution.
        let junk = [2.0, -1.0, 0.5, 0.5];
        assert_eq!(
            nf_nash_gap(game, junk.as_ptr(), 4, &mut gap),
            nf_status::NF_ERR_INVALID_INPUT
        );
        nf_game_free(game);

        // Missing file.
        let path = std::ffi::CString::new("/nonexistent/missing.game").unwrap();
        let mut loaded: *mut nf_game = ptr::null_mut();
        assert_eq!(
            nf_game_load(path.as_ptr(), &mut loaded),
            nf_status::NF_ERR_FORMAT
        );
        assert!(last_error_string().contains("missing.game"));
    }
}

#[test]
fn generated_header_is_present_and_covers_the_api() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("nashflow.h");
    let text = std::fs::read_to_string(header).expect("header generated by build script");
    for symbol in [
        "nf_status",
        "nf_game_new",
        "nf_game_load",
        "nf_integrate",
        "nf_flow_result_cesaro",
        "nf_last_error",
        "nf_pure_monotonicity",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}
