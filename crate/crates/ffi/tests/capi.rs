use std::ffi::{CStr, CString};
use std::ptr;

use omnigame_ffi::*;

const EXAMPLE: &str =
    r#"{"type":"packets","users":{"1":["a","b","c","d","e"],"2":["a","b","f"],"3":["c","d","f"]}}"#;

fn q(numerator: i64, denominator: i64) -> OmniRational {
    OmniRational { numerator, denominator }
}

fn last_error() -> Option<String> {
    let p = omni_last_error();
    if p.is_null() {
        return None;
    }
    let text = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { omni_string_free(p) };
    Some(text)
}

struct Handle(*mut OmniModel);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { omni_model_free(self.0) };
    }
}

fn load(json: &str) -> Result<Handle, OmniStatus> {
    let text = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    match unsafe { omni_model_from_json(text.as_ptr(), &mut out) } {
        OmniStatus::Ok => Ok(Handle(out)),
        status => {
            assert!(out.is_null());
            Err(status)
        }
    }
}

#[test]
fn three_users_through_the_c_abi() {
    let m = load(EXAMPLE).unwrap();
    assert_eq!(unsafe { omni_model_num_users(m.0) }, 3);

    let mut r = q(0, 1);
    assert_eq!(unsafe { omni_min_sum_rate(m.0, false, &mut r) }, OmniStatus::Ok);
    assert_eq!(r, q(7, 2));
    assert_eq!(unsafe { omni_min_sum_rate(m.0, true, &mut r) }, OmniStatus::Ok);
    assert_eq!(r, q(4, 1));

    let four = CString::new("4").unwrap();
    let mut rates = [q(0, 1); 3];
    assert_eq!(unsafe { omni_shapley(m.0, four.as_ptr(), rates.as_mut_ptr(), 3) }, OmniStatus::Ok);
    assert_eq!(rates, [q(8, 3), q(2, 3), q(2, 3)]);

    let order = [0usize, 1, 2];
    let status = unsafe { omni_greedy_vertex(m.0, four.as_ptr(), order.as_ptr(), rates.as_mut_ptr(), 3) };
    assert_eq!(status, OmniStatus::Ok);
    assert_eq!(rates, [q(3, 1), q(1, 1), q(0, 1)]);

    let mut member = false;
    let point = [q(3, 1), q(0, 1), q(1, 1)];
    let status = unsafe { omni_in_core(m.0, four.as_ptr(), point.as_ptr(), 3, true, &mut member) };
    assert_eq!(status, OmniStatus::Ok);
    assert!(member);
    assert_eq!(last_error(), None);
}

#[test]
fn core_threshold() {
    let m = load(EXAMPLE).unwrap();
    let mut nonempty = true;
    let low = CString::new("16/5").unwrap();
    assert_eq!(unsafe { omni_core_nonempty(m.0, low.as_ptr(), &mut nonempty) }, OmniStatus::Ok);
    assert!(!nonempty);
    let at = CString::new("3.5").unwrap();
    assert_eq!(unsafe { omni_core_nonempty(m.0, at.as_ptr(), &mut nonempty) }, OmniStatus::Ok);
    assert!(nonempty);

    let three = CString::new("3").unwrap();
    let mut rates = [q(0, 1); 3];
    let status = unsafe { omni_shapley(m.0, three.as_ptr(), rates.as_mut_ptr(), 3) };
    assert_eq!(status, OmniStatus::CoreEmpty);
    assert!(last_error().unwrap().contains("7/2"));
}

#[test]
fn error_codes() {
    assert_eq!(load("{").err(), Some(OmniStatus::Parse));
    let bad = r#"{"type":"entropy","users":["1","2"],"entries":[{"set":["1"],"H":"1"}]}"#;
    assert_eq!(load(bad).err(), Some(OmniStatus::InvalidModel));
    assert!(last_error().is_some());

    let mut r = q(0, 1);
    assert_eq!(unsafe { omni_min_sum_rate(ptr::null(), false, &mut r) }, OmniStatus::NullPointer);
    assert_eq!(unsafe { omni_model_num_users(ptr::null()) }, 0);

    let m = load(EXAMPLE).unwrap();
    let alpha = CString::new("1e3").unwrap();
    let mut flag = false;
    assert_eq!(unsafe { omni_core_nonempty(m.0, alpha.as_ptr(), &mut flag) }, OmniStatus::Parse);

    let four = CString::new("4").unwrap();
    let mut short = [q(0, 1); 2];
    let status = unsafe { omni_shapley(m.0, four.as_ptr(), short.as_mut_ptr(), 2) };
    assert_eq!(status, OmniStatus::BufferTooSmall);

    let order = [0usize, 0, 2];
    let mut rates = [q(0, 1); 3];
    let status = unsafe { omni_greedy_vertex(m.0, four.as_ptr(), order.as_ptr(), rates.as_mut_ptr(), 3) };
    assert_eq!(status, OmniStatus::InvalidArgument);

    let zero_den = [q(1, 0), q(0, 1), q(0, 1)];
    let status = unsafe { omni_in_core(m.0, four.as_ptr(), zero_den.as_ptr(), 3, false, &mut flag) };
    assert_eq!(status, OmniStatus::InvalidArgument);
    unsafe { omni_model_free(ptr::null_mut()) };
    unsafe { omni_string_free(ptr::null_mut()) };
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/omnigame.h")).unwrap();
    for name in [
        "typedef struct OmniModel OmniModel;",
        "OMNI_STATUS_CORE_EMPTY = 6",
        "omni_model_from_json",
        "omni_model_free",
        "omni_min_sum_rate",
        "omni_core_nonempty",
        "omni_in_core",
        "omni_shapley",
        "omni_greedy_vertex",
        "omni_last_error",
        "omni_string_free",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
