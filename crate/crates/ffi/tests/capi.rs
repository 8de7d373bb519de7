use std::ffi::{c_char, CStr, CString};
use std::ptr;

use zerosum_stop_ffi::*;

fn read(f: impl Fn(*mut c_char, usize, *mut usize) -> ZsStatus) -> Result<String, ZsStatus> {
    // Deliberately tiny so the resize path runs.
    let mut buf = vec![0 as c_char; 4];
    let mut len = 0usize;
    let mut st = f(buf.as_mut_ptr(), buf.len(), &mut len);
    if st == ZsStatus::BufferTooSmall {
        buf = vec![0 as c_char; len + 1];
        st = f(buf.as_mut_ptr(), buf.len(), &mut len);
    }
    if st != ZsStatus::Ok {
        return Err(st);
    }
    Ok(unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_str()
        .unwrap()
        .to_owned())
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe { zs_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn tables_round_trip() {
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { zs_tables_build(4, ZsTie::Stop, &mut t) },
        ZsStatus::Ok
    );
    assert_eq!(unsafe { zs_tables_m(t) }, 4);
    assert_eq!(
        read(|b, c, l| unsafe { zs_tables_value(t, 1, 0, b, c, l) }).unwrap(),
        "47/35"
    );
    assert_eq!(
        read(|b, c, l| unsafe { zs_tables_value(t, 0, 0, b, c, l) }).unwrap(),
        "1/1"
    );
    let mut stop = false;
    assert_eq!(unsafe { zs_tables_stops(t, 2, 0, &mut stop) }, ZsStatus::Ok);
    assert!(stop);
    let mut x = 0.0;
    assert_eq!(
        unsafe { zs_tables_value_f64(t, 1, 0, &mut x) },
        ZsStatus::Ok
    );
    assert!((x - 47.0 / 35.0).abs() < 1e-15);
    assert_eq!(
        unsafe { zs_tables_stops(t, 5, 0, &mut stop) },
        ZsStatus::InvalidArgument
    );
    assert!(last_error().contains("outside"));
    unsafe { zs_tables_free(t) };
}

#[test]
fn deck_value_needs_a_large_buffer() {
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { zs_tables_build(26, ZsTie::Stop, &mut t) },
        ZsStatus::Ok
    );
    let v = read(|b, c, l| unsafe { zs_tables_value(t, 0, 0, b, c, l) }).unwrap();
    let (p, q) = v.split_once('/').unwrap();
    let approx = p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap();
    assert!((approx - 2.6245).abs() < 1e-4, "{approx}");
    unsafe { zs_tables_free(t) };
}

#[test]
fn multiset_functions() {
    let text = CString::new("-5 -3 -3 1 1 1 2 6").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { zs_multiset_parse(text.as_ptr(), &mut m) },
        ZsStatus::Ok
    );
    assert_eq!(unsafe { zs_multiset_len(m) }, 8);
    assert_eq!(
        read(|b, c, l| unsafe { zs_f_value(m, b, c, l) }).unwrap(),
        "71/35"
    );
    unsafe { zs_multiset_free(m) };

    let mut d = ptr::null_mut();
    assert_eq!(unsafe { zs_multiset_binary(4, &mut d) }, ZsStatus::Ok);
    assert_eq!(
        read(|b, c, l| unsafe { zs_general_optimal_value(d, ZsMode::Suffix, b, c, l) }).unwrap(),
        "1/1"
    );
    assert_eq!(
        read(|b, c, l| unsafe {
            zs_exact_expected(ZsStrategy::Middle, d, ZsMode::Prefix, b, c, l)
        })
        .unwrap(),
        "18/35"
    );
    let mut r = ZsSimReport::default();
    assert_eq!(
        unsafe { zs_simulate(ZsStrategy::Optimal, d, ZsMode::Suffix, 100_000, 3, &mut r) },
        ZsStatus::Ok
    );
    assert_eq!((r.n, r.reps, r.seed), (8, 100_000, 3));
    assert!((r.mean - 1.0).abs() < 4.0 * r.stderr);
    unsafe { zs_multiset_free(d) };
}

#[test]
fn errors_map_to_codes() {
    let mut m = ptr::null_mut();
    let bad = CString::new("1 2 x").unwrap();
    assert_eq!(
        unsafe { zs_multiset_parse(bad.as_ptr(), &mut m) },
        ZsStatus::Parse
    );
    assert!(last_error().contains("x"));
    let unbalanced = CString::new("1 2").unwrap();
    assert_eq!(
        unsafe { zs_multiset_parse(unbalanced.as_ptr(), &mut m) },
        ZsStatus::Domain
    );
    assert_eq!(
        unsafe { zs_multiset_parse(ptr::null(), &mut m) },
        ZsStatus::NullPointer
    );
    assert_eq!(
        read(|b, c, l| unsafe { zs_w3_exact(7, b, c, l) }),
        Err(ZsStatus::Domain)
    );
    assert_eq!(
        read(|b, c, l| unsafe { zs_w3_exact(8, b, c, l) }).unwrap(),
        "18/35"
    );
    assert_eq!(unsafe { zs_last_error_message(ptr::null_mut(), 0) }, 0);
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { zs_tables_build(5000, ZsTie::Stop, &mut t) },
        ZsStatus::TooLarge
    );
    unsafe { zs_tables_free(ptr::null_mut()) };
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/zerosum_stop.h");
    for name in [
        "zs_last_error_message",
        "zs_tables_build",
        "zs_tables_free",
        "zs_tables_value",
        "zs_tables_value_f64",
        "zs_tables_stops",
        "zs_multiset_parse",
        "zs_multiset_binary",
        "zs_multiset_free",
        "zs_general_optimal_value",
        "zs_f_value",
        "zs_w3_exact",
        "zs_exact_expected",
        "zs_simulate",
        "typedef struct ZsTables ZsTables",
        "ZS_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
