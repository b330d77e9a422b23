//! Exercises the C entry points from Rust the way a foreign caller would:
//! through raw pointers and status codes only.

use std::ffi::CStr;
use std::ptr;

use multcomp_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0i8; 256];
    unsafe {
        mc_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn version_is_static_string() {
    let v = unsafe { CStr::from_ptr(mc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn prime_table_roundtrip() {
    unsafe {
        let mut table: *mut McPrimeTable = ptr::null_mut();
        assert_eq!(mc_prime_table_new(100, &mut table), McStatus::Ok);
        let mut len = 0usize;
        assert_eq!(mc_prime_table_len(table, &mut len), McStatus::Ok);
        assert_eq!(len, 25);
        let mut count = 0u64;
        assert_eq!(mc_prime_table_count(table, 10, &mut count), McStatus::Ok);
        assert_eq!(count, 4);
        let mut p = 0u64;
        assert_eq!(mc_prime_table_nth(table, 0, &mut p), McStatus::Ok);
        assert_eq!(p, 2);
        assert_eq!(
            mc_prime_table_count(table, 101, &mut count),
            McStatus::OutOfRange
        );
        assert!(last_error().contains("101"));
        mc_prime_table_free(table);
    }
}

#[test]
fn factorization_and_buffers() {
    unsafe {
        let mut sieve: *mut McFactorSieve = ptr::null_mut();
        assert_eq!(mc_factor_sieve_new(1000, &mut sieve), McStatus::Ok);
        let mut buf = [0u64; 8];
        let mut written = 0usize;
        assert_eq!(
            mc_factorize(sieve, 360, buf.as_mut_ptr(), buf.len(), &mut written),
            McStatus::Ok
        );
        assert_eq!(&buf[..written], &[2, 2, 2, 3, 3, 5]);
        // Too-small buffer reports the required size.
        assert_eq!(
            mc_factorize(sieve, 360, buf.as_mut_ptr(), 2, &mut written),
            McStatus::BufferTooSmall
        );
        assert_eq!(written, 6);
        // n = 1 is the empty product.
        assert_eq!(
            mc_factorize(sieve, 1, buf.as_mut_ptr(), buf.len(), &mut written),
            McStatus::Ok
        );
        assert_eq!(written, 0);
        mc_factor_sieve_free(sieve);
    }
}

#[test]
fn constants_match_library() {
    unsafe {
        let mut v = 0.0f64;
        assert_eq!(mc_gamma(0.5, &mut v), McStatus::Ok);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert_eq!(mc_gamma(-1.0, &mut v), McStatus::Domain);
        assert_eq!(mc_raikov_constant(2, &mut v), McStatus::Ok);
        assert!((v - 0.7978845608028654).abs() < 1e-12);
        assert_eq!(mc_upper_constant(2, &mut v), McStatus::Ok);
        assert!((v - 1.1283791670955126).abs() < 1e-12);
        assert_eq!(mc_upper_constant(1, &mut v), McStatus::InvalidArgument);
    }
}

#[test]
fn sets_counting_and_verification() {
    unsafe {
        let mut sieve: *mut McFactorSieve = ptr::null_mut();
        assert_eq!(mc_factor_sieve_new(1000, &mut sieve), McStatus::Ok);

        let elems = [1u64, 2, 4];
        let mut a: *mut McIntegerSet = ptr::null_mut();
        assert_eq!(
            mc_integer_set_new(elems.as_ptr(), elems.len(), 10, &mut a),
            McStatus::Ok
        );
        let mut n = 0u64;
        assert_eq!(mc_repr_count(a, 2, 4, sieve, &mut n), McStatus::Ok);
        assert_eq!(n, 3);

        let mut full: *mut McIntegerSet = ptr::null_mut();
        assert_eq!(mc_integer_set_range(100, &mut full), McStatus::Ok);
        let mut count = 0u64;
        assert_eq!(mc_integer_set_counting(full, 9, &mut count), McStatus::Ok);
        assert_eq!(count, 9);

        let family = [full as *const McIntegerSet, full as *const McIntegerSet];
        let mut total = 0u64;
        assert_eq!(
            mc_summatory_repr(family.as_ptr(), 2, 10, &mut total),
            McStatus::Ok
        );
        assert_eq!(total, 27);

        let mut found = false;
        let mut counterexample = 0u64;
        assert_eq!(
            mc_verify_complement(family.as_ptr(), 2, 100, sieve, &mut found, &mut counterexample),
            McStatus::Ok
        );
        assert!(!found);

        // {1} u primes against itself fails first at 8.
        let mut ap_elems = vec![1u64];
        ap_elems.extend([2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]);
        let mut ap: *mut McIntegerSet = ptr::null_mut();
        assert_eq!(
            mc_integer_set_new(ap_elems.as_ptr(), ap_elems.len(), 50, &mut ap),
            McStatus::Ok
        );
        let pair = [ap as *const McIntegerSet, ap as *const McIntegerSet];
        assert_eq!(
            mc_verify_complement(pair.as_ptr(), 2, 50, sieve, &mut found, &mut counterexample),
            McStatus::Ok
        );
        assert!(found);
        assert_eq!(counterexample, 8);

        mc_integer_set_free(a);
        mc_integer_set_free(full);
        mc_integer_set_free(ap);
        mc_factor_sieve_free(sieve);
    }
}

#[test]
fn sign_solver_binary_case() {
    unsafe {
        let q: Vec<f64> = (1..=20).map(|k| 2f64.powi(-k)).collect();
        let mut signs = vec![0i8; q.len()];
        let mut achieved = 0.0;
        let mut residual = 0.0;
        let tail = 2f64.powi(-20);
        assert_eq!(
            mc_sign_solve(
                q.as_ptr(),
                q.len(),
                0.0,
                tail,
                signs.as_mut_ptr(),
                &mut achieved,
                &mut residual
            ),
            McStatus::Ok
        );
        assert_eq!(signs[0], 1);
        assert!(signs[1..].iter().all(|&s| s == -1));
        assert!(residual.abs() <= tail);

        // Infeasible target.
        assert_eq!(
            mc_sign_solve(
                q.as_ptr(),
                q.len(),
                2.0,
                tail,
                signs.as_mut_ptr(),
                &mut achieved,
                &mut residual
            ),
            McStatus::Infeasible
        );
    }
}

#[test]
fn partition_and_family_pipeline() {
    unsafe {
        let cutoff = 120_000u64;
        let tau = [0.5f64, 0.5];
        let a = [1.0f64, 1.0];
        let mut partition: *mut McPartition = ptr::null_mut();
        assert_eq!(
            mc_partition_build(tau.as_ptr(), a.as_ptr(), 2, cutoff, &mut partition),
            McStatus::Ok
        );
        let mut parts = 0usize;
        assert_eq!(mc_partition_part_count(partition, &mut parts), McStatus::Ok);
        assert_eq!(parts, 2);
        let mut idx2 = 0usize;
        let mut idx3 = 0usize;
        assert_eq!(mc_partition_part_of(partition, 2, &mut idx2), McStatus::Ok);
        assert_eq!(mc_partition_part_of(partition, 3, &mut idx3), McStatus::Ok);
        assert!(idx2 >= 1 && idx2 <= 2 && idx3 >= 1 && idx3 <= 2);
        assert_eq!(
            mc_partition_part_of(partition, 4, &mut idx2),
            McStatus::OutOfRange
        );
        let mut count = 0u64;
        let mut density = 0.0;
        let mut mertens = 0.0;
        assert_eq!(
            mc_partition_part_stats(partition, 1, &mut count, &mut density, &mut mertens),
            McStatus::Ok
        );
        assert!((mertens - 1.0).abs() < 1e-6);

        let mut sieve: *mut McFactorSieve = ptr::null_mut();
        assert_eq!(mc_factor_sieve_new(cutoff, &mut sieve), McStatus::Ok);
        let mut family: *mut McFamily = ptr::null_mut();
        assert_eq!(
            mc_smooth_family_build(partition, sieve, cutoff, &mut family),
            McStatus::Ok
        );
        let mut h = 0usize;
        assert_eq!(mc_family_h(family, &mut h), McStatus::Ok);
        assert_eq!(h, 2);
        let mut found = true;
        let mut counterexample = 1u64;
        assert_eq!(
            mc_family_verify(family, cutoff, sieve, &mut found, &mut counterexample),
            McStatus::Ok
        );
        assert!(!found);

        let dir = std::env::temp_dir().join(format!("multcomp-ffi-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = std::ffi::CString::new(
            dir.join("family.txt").to_str().unwrap().to_owned(),
        )
        .unwrap();
        assert_eq!(mc_family_write(family, path.as_ptr()), McStatus::Ok);
        let text = std::fs::read_to_string(dir.join("family.txt")).unwrap();
        assert!(text.starts_with("2 0 0 120000"));
        std::fs::remove_dir_all(&dir).ok();

        mc_family_free(family);
        mc_factor_sieve_free(sieve);
        mc_partition_free(partition);
    }
}

#[test]
fn checkpoint_family_over_ffi() {
    unsafe {
        let mut table: *mut McPrimeTable = ptr::null_mut();
        let mut sieve: *mut McFactorSieve = ptr::null_mut();
        assert_eq!(mc_prime_table_new(50_000, &mut table), McStatus::Ok);
        assert_eq!(mc_factor_sieve_new(50_000, &mut sieve), McStatus::Ok);
        let mut family: *mut McFamily = ptr::null_mut();
        assert_eq!(
            mc_checkpoint_family_build(2, 0.5, 2, 30, 0, table, sieve, &mut family),
            McStatus::Ok
        );
        let mut checkpoints = 0usize;
        assert_eq!(
            mc_family_checkpoint_count(family, &mut checkpoints),
            McStatus::Ok
        );
        assert_eq!(checkpoints, 3);
        let mut c = 0u64;
        assert_eq!(mc_family_checkpoint(family, 1, &mut c), McStatus::Ok);
        assert_eq!(c, 27_001);

        let mut len = 0usize;
        assert_eq!(mc_family_set_len(family, 0, &mut len), McStatus::Ok);
        let mut buf = vec![0u64; len];
        let mut written = 0usize;
        assert_eq!(
            mc_family_set_elements(family, 0, buf.as_mut_ptr(), buf.len(), &mut written),
            McStatus::Ok
        );
        assert_eq!(written, len);
        assert!(buf.windows(2).all(|w| w[0] < w[1]));

        mc_family_free(family);
        mc_factor_sieve_free(sieve);
        mc_prime_table_free(table);
    }
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        let mut out = 0u64;
        assert_eq!(
            mc_prime_table_count(ptr::null(), 10, &mut out),
            McStatus::NullPointer
        );
        let mut table: *mut McPrimeTable = ptr::null_mut();
        assert_eq!(mc_prime_table_new(100, &mut table), McStatus::Ok);
        assert_eq!(
            mc_prime_table_count(table, 10, ptr::null_mut()),
            McStatus::NullPointer
        );
        mc_prime_table_free(table);
        // Freeing null is a no-op, as in free(3).
        mc_prime_table_free(ptr::null_mut());
        mc_family_free(ptr::null_mut());
    }
}

/// Every exported symbol appears in the shipped header, so the header
/// cannot silently drift from the ABI.
#[test]
fn header_covers_every_export() {
    let lib_src = include_str!("../src/lib.rs");
    let header = include_str!("../include/multcomp.h");
    let mut missing = Vec::new();
    for line in lib_src.lines() {
        let line = line.trim_start();
        if let Some(rest) = line.strip_prefix("pub unsafe extern \"C\" fn ") {
            let name = rest.split('(').next().unwrap();
            if !header.contains(name) {
                missing.push(name.to_string());
            }
        }
        if let Some(rest) = line.strip_prefix("pub extern \"C\" fn ") {
            let name = rest.split('(').next().unwrap();
            if !header.contains(name) {
                missing.push(name.to_string());
            }
        }
    }
    assert!(missing.is_empty(), "header missing: {missing:?}");
}
