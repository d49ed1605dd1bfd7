use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use elliptic_ainf::ainf::{BasisElement, ProductValue, StructureConstants};
use elliptic_ainf::eisenstein::SeriesContext;
use elliptic_ainf::{Lattice, SummationConfig};
use elliptic_ainf_ffi::*;
use num_complex::Complex64;

struct Handle(*mut EaLattice);

impl Handle {
    fn tau(re: f64, im: f64) -> Handle {
        let mut p = ptr::null_mut();
        assert_eq!(unsafe { ea_lattice_from_tau(re, im, &mut p) }, EaStatus::Ok);
        assert!(!p.is_null());
        Handle(p)
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { ea_lattice_free(self.0) }
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ea_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn eisenstein_rapid_at_square_lattice() {
    let h = Handle::tau(0.0, 1.0);
    let mut v = EaValue::default();
    assert_eq!(
        unsafe { ea_eisenstein(h.0, 4, EaMethod::Rapid, &mut v) },
        EaStatus::Ok
    );
    assert!((v.re - 3.1512120021538976).abs() < 1e-12);
    assert!(v.im.abs() < 1e-12);
    assert!(v.tail_bound <= 1e-15);
    let mut c = EaValue::default();
    assert_eq!(
        unsafe { ea_eisenstein(h.0, 4, EaMethod::QSeries, &mut c) },
        EaStatus::Ok
    );
    assert!((c.re - v.re).abs() < 1e-10);
}

#[test]
fn odd_weight_is_rejected_with_message() {
    let h = Handle::tau(0.0, 1.0);
    let mut v = EaValue::default();
    assert_eq!(
        unsafe { ea_eisenstein(h.0, 3, EaMethod::Rapid, &mut v) },
        EaStatus::InvalidArgument
    );
    assert!(last_error().contains("even"));
}

#[test]
fn g_and_m_match_the_library() {
    let h = Handle::tau(0.25, 1.5);
    let lattice = Lattice::from_tau(Complex64::new(0.25, 1.5)).unwrap();
    let cfg = SummationConfig::default();
    let mut v = EaValue::default();
    assert_eq!(unsafe { ea_g(h.0, 1, 2, &mut v) }, EaStatus::Ok);
    let g = SeriesContext::new(lattice, cfg).unwrap().g(1, 2).unwrap();
    assert_eq!((v.re, v.im), (g.value.re, g.value.im));

    assert_eq!(
        unsafe { ea_m_direct(h.0, 1, 0, 0, 0, &mut v) },
        EaStatus::Ok
    );
    let m = StructureConstants::new(&lattice, &cfg)
        .unwrap()
        .m_direct(1, 0, 0, 0)
        .unwrap();
    assert_eq!((v.re, v.im), (m.value.re, m.value.im));
}

#[test]
fn products_through_the_abi() {
    let h = Handle::tau(0.0, 2.0);
    let mut p = EaProduct {
        is_zero: true,
        output: EaBasisElement::IdO,
        coefficient: EaValue::default(),
    };
    let theta_eta = [EaBasisElement::Theta, EaBasisElement::Eta];
    assert_eq!(
        unsafe { ea_product(h.0, theta_eta.as_ptr(), 2, &mut p) },
        EaStatus::Ok
    );
    assert!(!p.is_zero);
    assert_eq!(p.output, EaBasisElement::Xi);
    assert_eq!((p.coefficient.re, p.coefficient.im), (1.0, 0.0));

    // family I with (a, b, c, d) = (1, 0, 0, 0)
    let xs = [
        EaBasisElement::Xi,
        EaBasisElement::Theta,
        EaBasisElement::Eta,
        EaBasisElement::Theta,
    ];
    assert_eq!(
        unsafe { ea_product(h.0, xs.as_ptr(), 4, &mut p) },
        EaStatus::Ok
    );
    let lattice = Lattice::from_tau(Complex64::new(0.0, 2.0)).unwrap();
    let sc = StructureConstants::new(&lattice, &SummationConfig::default()).unwrap();
    let expected = sc
        .product(&[
            BasisElement::Xi,
            BasisElement::Theta,
            BasisElement::Eta,
            BasisElement::Theta,
        ])
        .unwrap();
    match expected {
        ProductValue::Term {
            coefficient,
            output,
        } => {
            assert!(!p.is_zero);
            assert_eq!(p.output, EaBasisElement::Theta);
            assert_eq!(output, BasisElement::Theta);
            assert_eq!(p.coefficient.re, coefficient.value.re);
        }
        ProductValue::Zero => assert!(p.is_zero),
    }

    let bad = [EaBasisElement::Theta, EaBasisElement::Theta];
    assert_eq!(
        unsafe { ea_product(h.0, bad.as_ptr(), 2, &mut p) },
        EaStatus::NonComposable
    );
    assert!(last_error().contains("position 1"));
}

#[test]
fn table_handle_round_trip() {
    let h = Handle::tau(0.0, 2.0);
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ea_table_new(h.0, 3, &mut t) }, EaStatus::Ok);
    assert_eq!(unsafe { ea_table_len(t) }, 12);
    unsafe { ea_table_free(t) };

    assert_eq!(unsafe { ea_table_new(h.0, 6, &mut t) }, EaStatus::Ok);
    let n = unsafe { ea_table_len(t) };
    assert!(n > 12);
    let mut e = EaTableEntry {
        arity: 0,
        output: EaBasisElement::IdO,
        coefficient: EaValue::default(),
    };
    let mut len = 0usize;
    let mut buf = [EaBasisElement::IdO; 6];
    for i in 0..n {
        assert_eq!(unsafe { ea_table_entry(t, i, &mut e) }, EaStatus::Ok);
        assert_eq!(
            unsafe { ea_table_entry_inputs(t, i, buf.as_mut_ptr(), buf.len(), &mut len) },
            EaStatus::Ok
        );
        assert_eq!(len as u32, e.arity);
        assert!(e.arity.is_multiple_of(2));
    }
    assert_eq!(
        unsafe { ea_table_entry(t, n, &mut e) },
        EaStatus::OutOfRange
    );
    assert_eq!(
        unsafe { ea_table_entry_inputs(t, n - 1, buf.as_mut_ptr(), 1, &mut len) },
        EaStatus::OutOfRange
    );
    assert_eq!(len, 6);
    unsafe { ea_table_free(t) };
}

#[test]
fn invalid_handles_and_arguments() {
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { ea_lattice_new(0.0, 1.0, 1.0, 0.0, &mut p) },
        EaStatus::NonOrientedBasis
    );
    assert!(p.is_null());
    assert!(last_error().contains("oriented"));
    assert_eq!(
        unsafe { ea_lattice_from_tau(0.0, 1.0, ptr::null_mut()) },
        EaStatus::NullPointer
    );

    let mut v = EaValue::default();
    assert_eq!(
        unsafe { ea_g(ptr::null(), 1, 2, &mut v) },
        EaStatus::NullPointer
    );
    assert_eq!(unsafe { ea_table_len(ptr::null()) }, 0);
    unsafe {
        ea_lattice_free(ptr::null_mut());
        ea_table_free(ptr::null_mut());
    }

    let h = Handle::tau(0.0, 1.0);
    assert_eq!(
        unsafe { ea_lattice_set_tolerance(h.0, -1.0) },
        EaStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { ea_lattice_set_tolerance(h.0, 1e-12) },
        EaStatus::Ok
    );
    assert!(last_error().is_empty());
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(
        unsafe { ea_lattice_tau(h.0, &mut re, &mut im) },
        EaStatus::Ok
    );
    assert_eq!((re, im), (0.0, 1.0));
}

#[test]
fn status_names() {
    let s = unsafe { CStr::from_ptr(ea_status_name(EaStatus::NonComposable)) };
    assert_eq!(s.to_str().unwrap(), "non-composable input");
}

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn static_lib() -> PathBuf {
    // tests run from <target>/<profile>/deps
    let deps = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    deps.parent().unwrap().join("libelliptic_ainf_ffi.a")
}

#[test]
fn header_declares_the_abi() {
    let header = std::fs::read_to_string(crate_dir().join("include/elliptic_ainf.h")).unwrap();
    for name in [
        "ea_lattice_new",
        "ea_lattice_from_tau",
        "ea_lattice_free",
        "ea_eisenstein",
        "ea_g",
        "ea_m_direct",
        "ea_product",
        "ea_table_new",
        "ea_table_len",
        "ea_table_entry",
        "ea_table_entry_inputs",
        "ea_table_free",
        "ea_last_error_message",
        "typedef struct EaLattice EaLattice",
        "EA_STATUS_NON_COMPOSABLE = 4",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let lib = static_lib();
    assert!(lib.exists(), "{} not built", lib.display());
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let exe = out_dir.join("ea_smoke");
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler not available");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).contains("e*_4(i) = 3.151212002153"));
}
