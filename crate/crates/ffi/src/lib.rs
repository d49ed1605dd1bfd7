//! C ABI for `elliptic-ainf`.
//!
//! Lattices and structure tables are opaque heap handles created by `ea_*_new` and released by
//! the matching `ea_*_free`. Every fallible function returns an [`EaStatus`]; on failure the
//! message is kept per thread and read back with [`ea_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use elliptic_ainf::ainf::{BasisElement, StructureConstants, StructureTable};
use elliptic_ainf::eisenstein::{
    eisenstein_value, EisensteinIndex, EisensteinMethod, SeriesContext,
};
use elliptic_ainf::{Error, Lattice, SeriesValue, SummationConfig};
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonOrientedBasis = 3,
    NonComposable = 4,
    BudgetExceeded = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EaMethod {
    Rapid = 0,
    Classical = 1,
    QSeries = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EaBasisElement {
    IdO = 0,
    IdL = 1,
    Theta = 2,
    Eta = 3,
    Xi = 4,
    XiL = 5,
}

/// A complex value together with a bound on the truncated tail of its series.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EaValue {
    pub re: f64,
    pub im: f64,
    pub tail_bound: f64,
}

/// One product `m_n(inputs) = coefficient * output`; `is_zero` marks the vanishing ones.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EaProduct {
    pub is_zero: bool,
    pub output: EaBasisElement,
    pub coefficient: EaValue,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EaTableEntry {
    pub arity: u32,
    pub output: EaBasisElement,
    pub coefficient: EaValue,
}

/// Opaque lattice handle carrying its summation settings.
pub struct EaLattice {
    lattice: Lattice,
    cfg: SummationConfig,
}

/// Opaque product table handle.
pub struct EaTable {
    table: StructureTable,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> EaStatus {
    match e {
        Error::NonOrientedBasis { .. } => EaStatus::NonOrientedBasis,
        Error::NonComposable { .. } => EaStatus::NonComposable,
        Error::TooManyPoints { .. } | Error::Budget(_) | Error::QSeriesDivergent(_) => {
            EaStatus::BudgetExceeded
        }
        _ => EaStatus::InvalidArgument,
    }
}

fn fail(status: EaStatus, msg: &str) -> EaStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), EaStatus>) -> EaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EaStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(EaStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, EaStatus>;
}

impl<T> OrStatus<T> for elliptic_ainf::Result<T> {
    fn or_status(self) -> Result<T, EaStatus> {
        self.map_err(|e| fail(status_of(&e), &e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, EaStatus> {
    p.as_ref()
        .ok_or_else(|| fail(EaStatus::NullPointer, "null pointer argument"))
}

unsafe fn write<T>(p: *mut T, v: T) -> Result<(), EaStatus> {
    if p.is_null() {
        return Err(fail(EaStatus::NullPointer, "null output pointer"));
    }
    p.write(v);
    Ok(())
}

fn value(v: SeriesValue) -> EaValue {
    EaValue {
        re: v.value.re,
        im: v.value.im,
        tail_bound: v.tail_bound,
    }
}

fn to_basis(b: BasisElement) -> EaBasisElement {
    match b {
        BasisElement::IdO => EaBasisElement::IdO,
        BasisElement::IdL => EaBasisElement::IdL,
        BasisElement::Theta => EaBasisElement::Theta,
        BasisElement::Eta => EaBasisElement::Eta,
        BasisElement::Xi => EaBasisElement::Xi,
        BasisElement::XiL => EaBasisElement::XiL,
    }
}

fn from_basis(b: EaBasisElement) -> BasisElement {
    match b {
        EaBasisElement::IdO => BasisElement::IdO,
        EaBasisElement::IdL => BasisElement::IdL,
        EaBasisElement::Theta => BasisElement::Theta,
        EaBasisElement::Eta => BasisElement::Eta,
        EaBasisElement::Xi => BasisElement::Xi,
        EaBasisElement::XiL => BasisElement::XiL,
    }
}

fn new_lattice(lattice: elliptic_ainf::Result<Lattice>, out: *mut *mut EaLattice) -> EaStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(EaStatus::NullPointer, "null output pointer"));
        }
        let lattice = lattice.or_status()?;
        let handle = Box::new(EaLattice {
            lattice,
            cfg: SummationConfig::default(),
        });
        unsafe { out.write(Box::into_raw(handle)) };
        Ok(())
    })
}

/// Creates the lattice `Z omega1 + Z omega2`; the basis must be oriented.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ea_lattice_new(
    omega1_re: f64,
    omega1_im: f64,
    omega2_re: f64,
    omega2_im: f64,
    out: *mut *mut EaLattice,
) -> EaStatus {
    let l = Lattice::new(
        Complex64::new(omega1_re, omega1_im),
        Complex64::new(omega2_re, omega2_im),
    );
    new_lattice(l, out)
}

/// Creates the lattice `Z + Z tau`, `Im tau > 0`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ea_lattice_from_tau(
    tau_re: f64,
    tau_im: f64,
    out: *mut *mut EaLattice,
) -> EaStatus {
    new_lattice(Lattice::from_tau(Complex64::new(tau_re, tau_im)), out)
}

/// Sets the bound demanded of every truncated tail (default `1e-15`).
///
/// # Safety
/// `lattice` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ea_lattice_set_tolerance(
    lattice: *mut EaLattice,
    epsilon: f64,
) -> EaStatus {
    guard(|| {
        let h = lattice
            .as_mut()
            .ok_or_else(|| fail(EaStatus::NullPointer, "null lattice"))?;
        let cfg = h.cfg.with_epsilon(epsilon);
        cfg.validate().or_status()?;
        h.cfg = cfg;
        Ok(())
    })
}

/// # Safety
/// `lattice` must be a live handle or null, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ea_lattice_free(lattice: *mut EaLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// `tau = omega2 / omega1`.
///
/// # Safety
/// `lattice` must be a live handle; `re` and `im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ea_lattice_tau(
    lattice: *const EaLattice,
    re: *mut f64,
    im: *mut f64,
) -> EaStatus {
    guard(|| {
        let tau = deref(lattice)?.lattice.tau();
        write(re, tau.re)?;
        write(im, tau.im)
    })
}

/// `e*_n` of the lattice by the chosen route; `n` even, at least 2.
///
/// # Safety
/// `lattice` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ea_eisenstein(
    lattice: *const EaLattice,
    n: u32,
    method: EaMethod,
    out: *mut EaValue,
) -> EaStatus {
    guard(|| {
        let h = deref(lattice)?;
        let idx = EisensteinIndex::new(n).or_status()?;
        let method = match method {
            EaMethod::Rapid => EisensteinMethod::Rapid,
            EaMethod::Classical => EisensteinMethod::Classical,
            EaMethod::QSeries => EisensteinMethod::QSeries,
        };
        let v = eisenstein_value(&h.lattice, idx, method, &h.cfg).or_status()?;
        write(out, value(v))
    })
}

/// `g_{a,b}` of the lattice.
///
/// # Safety
/// `lattice` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ea_g(
    lattice: *const EaLattice,
    a: u32,
    b: u32,
    out: *mut EaValue,
) -> EaStatus {
    guard(|| {
        let h = deref(lattice)?;
        let v = SeriesContext::new(h.lattice, h.cfg)
            .or_status()?
            .g(a, b)
            .or_status()?;
        write(out, value(v))
    })
}

/// The structure constant `M(a,b,c,d)` of the lattice's normalization.
///
/// # Safety
/// `lattice` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ea_m_direct(
    lattice: *const EaLattice,
    a: u32,
    b: u32,
    c: u32,
    d: u32,
    out: *mut EaValue,
) -> EaStatus {
    guard(|| {
        let h = deref(lattice)?;
        let v = StructureConstants::new(&h.lattice, &h.cfg)
            .or_status()?
            .m_direct(a, b, c, d)
            .or_status()?;
        write(out, value(v))
    })
}

/// The product of a composable string of `len` basis elements.
///
/// # Safety
/// `lattice` must be a live handle, `inputs` must point to `len` elements, and `out` must be
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ea_product(
    lattice: *const EaLattice,
    inputs: *const EaBasisElement,
    len: usize,
    out: *mut EaProduct,
) -> EaStatus {
    guard(|| {
        let h = deref(lattice)?;
        if inputs.is_null() && len > 0 {
            return Err(fail(EaStatus::NullPointer, "null inputs"));
        }
        let xs: Vec<BasisElement> = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(inputs, len)
                .iter()
                .map(|&b| from_basis(b))
                .collect()
        };
        let sc = StructureConstants::new(&h.lattice, &h.cfg).or_status()?;
        let p = match sc.product(&xs).or_status()? {
            elliptic_ainf::ainf::ProductValue::Zero => EaProduct {
                is_zero: true,
                output: EaBasisElement::IdO,
                coefficient: EaValue::default(),
            },
            elliptic_ainf::ainf::ProductValue::Term {
                coefficient,
                output,
            } => EaProduct {
                is_zero: false,
                output: to_basis(output),
                coefficient: value(coefficient),
            },
        };
        write(out, p)
    })
}

/// Builds the table of all nonzero products of arity `2..=n_max`.
///
/// # Safety
/// `lattice` must be a live handle; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ea_table_new(
    lattice: *const EaLattice,
    n_max: u32,
    out: *mut *mut EaTable,
) -> EaStatus {
    guard(|| {
        let h = deref(lattice)?;
        if out.is_null() {
            return Err(fail(EaStatus::NullPointer, "null output pointer"));
        }
        let table = StructureConstants::new(&h.lattice, &h.cfg)
            .or_status()?
            .table(n_max)
            .or_status()?;
        out.write(Box::into_raw(Box::new(EaTable { table })));
        Ok(())
    })
}

/// Number of entries; 0 for a null handle.
///
/// # Safety
/// `table` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ea_table_len(table: *const EaTable) -> usize {
    table.as_ref().map_or(0, |t| t.table.len())
}

unsafe fn entry<'a>(
    table: *const EaTable,
    index: usize,
) -> Result<&'a elliptic_ainf::ainf::TableEntry, EaStatus> {
    let t = deref(table)?;
    t.table.entries.get(index).ok_or_else(|| {
        fail(
            EaStatus::OutOfRange,
            &format!("index {index} out of range for {} entries", t.table.len()),
        )
    })
}

/// Arity, output and coefficient of entry `index`.
///
/// # Safety
/// `table` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ea_table_entry(
    table: *const EaTable,
    index: usize,
    out: *mut EaTableEntry,
) -> EaStatus {
    guard(|| {
        let e = entry(table, index)?;
        write(
            out,
            EaTableEntry {
                arity: e.arity,
                output: to_basis(e.output),
                coefficient: EaValue {
                    re: e.coefficient.re,
                    im: e.coefficient.im,
                    tail_bound: e.tail_bound,
                },
            },
        )
    })
}

/// Copies the inputs of entry `index` into `buf` (capacity `cap`) and stores their number in
/// `len`. With a too small buffer only `len` is written and `OutOfRange` is returned.
///
/// # Safety
/// `table` must be a live handle, `buf` valid for `cap` writes (or null with `cap == 0`), and
/// `len` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ea_table_entry_inputs(
    table: *const EaTable,
    index: usize,
    buf: *mut EaBasisElement,
    cap: usize,
    len: *mut usize,
) -> EaStatus {
    guard(|| {
        let e = entry(table, index)?;
        write(len, e.inputs.len())?;
        if e.inputs.len() > cap {
            return Err(fail(
                EaStatus::OutOfRange,
                &format!("buffer holds {cap}, entry has {} inputs", e.inputs.len()),
            ));
        }
        if !e.inputs.is_empty() {
            if buf.is_null() {
                return Err(fail(EaStatus::NullPointer, "null buffer"));
            }
            for (i, &b) in e.inputs.iter().enumerate() {
                buf.add(i).write(to_basis(b));
            }
        }
        Ok(())
    })
}

/// # Safety
/// `table` must be a live handle or null, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ea_table_free(table: *mut EaTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Message of the last failed call on this thread, empty after a successful one. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ea_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn ea_status_name(status: EaStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        EaStatus::Ok => b"ok\0",
        EaStatus::NullPointer => b"null pointer\0",
        EaStatus::InvalidArgument => b"invalid argument\0",
        EaStatus::NonOrientedBasis => b"non-oriented basis\0",
        EaStatus::NonComposable => b"non-composable input\0",
        EaStatus::BudgetExceeded => b"budget exceeded\0",
        EaStatus::OutOfRange => b"out of range\0",
        EaStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_round_trip() {
        for b in BasisElement::ALL {
            assert_eq!(from_basis(to_basis(b)), b);
        }
    }

    #[test]
    fn error_mapping() {
        assert_eq!(
            status_of(&Error::NonComposable { position: 2 }),
            EaStatus::NonComposable
        );
        assert_eq!(
            status_of(&Error::Budget("x".into())),
            EaStatus::BudgetExceeded
        );
        assert_eq!(status_of(&Error::ZeroScale), EaStatus::InvalidArgument);
    }

    #[test]
    fn message_is_cleared_on_success() {
        set_error("boom");
        assert_eq!(guard(|| Ok(())), EaStatus::Ok);
        let msg = unsafe { std::ffi::CStr::from_ptr(ea_last_error_message()) };
        assert!(msg.to_bytes().is_empty());
    }

    #[test]
    fn panics_become_status() {
        assert_eq!(guard(|| panic!("x")), EaStatus::Panic);
    }
}
