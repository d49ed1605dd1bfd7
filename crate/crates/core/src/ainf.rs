//! Structure constants of the minimal A-infinity structure on `Ext*(O + L, O + L)`.
//!
//! Input strings are read left to right in order of application: the target of each element is
//! the source of the next, so a product of `x_1, ..., x_n` lies in `Hom(source x_1, target x_n)`.
//! All constants are computed on the normalized lattice `Z + Z tau`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::eisenstein::{binomial, factorial, g_ab_symbolic, SeriesContext};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, SeriesValue, SummationConfig};

/// Largest arity accepted by [`full_table`].
pub const MAX_TABLE_ARITY: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Object {
    O,
    L,
}

/// The six basis elements of `Ext*(O + L, O + L)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisElement {
    #[serde(rename = "id_O")]
    IdO,
    #[serde(rename = "id_L")]
    IdL,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "xi")]
    Xi,
    #[serde(rename = "xi_L")]
    XiL,
}

impl BasisElement {
    pub const ALL: [BasisElement; 6] = [
        BasisElement::IdO,
        BasisElement::IdL,
        BasisElement::Theta,
        BasisElement::Eta,
        BasisElement::Xi,
        BasisElement::XiL,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisElement::IdO => "id_O",
            BasisElement::IdL => "id_L",
            BasisElement::Theta => "theta",
            BasisElement::Eta => "eta",
            BasisElement::Xi => "xi",
            BasisElement::XiL => "xi_L",
        }
    }

    pub fn source(self) -> Object {
        match self {
            BasisElement::IdO | BasisElement::Theta | BasisElement::Xi => Object::O,
            BasisElement::IdL | BasisElement::Eta | BasisElement::XiL => Object::L,
        }
    }

    pub fn target(self) -> Object {
        match self {
            BasisElement::IdO | BasisElement::Eta | BasisElement::Xi => Object::O,
            BasisElement::IdL | BasisElement::Theta | BasisElement::XiL => Object::L,
        }
    }

    pub fn degree(self) -> u32 {
        match self {
            BasisElement::IdO | BasisElement::IdL | BasisElement::Theta => 0,
            BasisElement::Eta | BasisElement::Xi | BasisElement::XiL => 1,
        }
    }

    pub fn is_identity(self) -> bool {
        matches!(self, BasisElement::IdO | BasisElement::IdL)
    }
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BasisElement::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidIndex(format!("unknown basis element '{s}'")))
    }
}

/// Position of the first break in left-to-right composability, if any.
pub fn check_composable(inputs: &[BasisElement]) -> Result<()> {
    for (i, w) in inputs.windows(2).enumerate() {
        if w[0].target() != w[1].source() {
            return Err(Error::NonComposable { position: i + 1 });
        }
    }
    Ok(())
}

/// The four shapes of nonvanishing higher products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    I,
    II,
    III,
    IV,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::I, Family::II, Family::III, Family::IV];

    fn exponent_count(self) -> usize {
        match self {
            Family::I | Family::II => 4,
            Family::III | Family::IV => 5,
        }
    }

    pub fn output(self) -> BasisElement {
        match self {
            Family::I => BasisElement::Theta,
            Family::II => BasisElement::Eta,
            Family::III => BasisElement::IdO,
            Family::IV => BasisElement::IdL,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::I => "I",
            Family::II => "II",
            Family::III => "III",
            Family::IV => "IV",
        };
        f.write_str(s)
    }
}

/// A higher product `m_n` of one of the four families.
///
/// - I: `xi^a, theta, xi_L^b, eta, xi^c, theta, xi_L^d -> M(a,b,c,d) theta`
/// - II: `xi_L^a, eta, xi^b, theta, xi_L^c, eta, xi^d -> M(a,b,c,d) eta`
/// - III: the family-I string followed by `eta, xi^e -> M(a+e+1,b,c,d) id_O`
/// - IV: the family-II string followed by `theta, xi_L^e -> M(a+e+1,b,c,d) id_L`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProductIndex {
    pub family: Family,
    pub exponents: Vec<u32>,
}

impl ProductIndex {
    pub fn new(family: Family, exponents: &[u32]) -> Result<Self> {
        if exponents.len() != family.exponent_count() {
            return Err(Error::InvalidIndex(format!(
                "family {family} takes {} exponents, got {}",
                family.exponent_count(),
                exponents.len()
            )));
        }
        let idx = ProductIndex {
            family,
            exponents: exponents.to_vec(),
        };
        check_composable(&idx.inputs())?;
        Ok(idx)
    }

    pub fn arity(&self) -> u32 {
        let extra = match self.family {
            Family::I | Family::II => 3,
            Family::III | Family::IV => 4,
        };
        self.exponents.iter().sum::<u32>() + extra
    }

    pub fn inputs(&self) -> Vec<BasisElement> {
        use BasisElement::*;
        let e = &self.exponents;
        let (x, y) = match self.family {
            Family::I | Family::III => (Xi, XiL),
            Family::II | Family::IV => (XiL, Xi),
        };
        let (p, q) = match self.family {
            Family::I | Family::III => (Theta, Eta),
            Family::II | Family::IV => (Eta, Theta),
        };
        let mut v = Vec::with_capacity(self.arity() as usize);
        let run = |el: BasisElement, k: u32, v: &mut Vec<BasisElement>| {
            v.extend(std::iter::repeat_n(el, k as usize))
        };
        run(x, e[0], &mut v);
        v.push(p);
        run(y, e[1], &mut v);
        v.push(q);
        run(x, e[2], &mut v);
        v.push(p);
        run(y, e[3], &mut v);
        if e.len() == 5 {
            v.push(q);
            run(x, e[4], &mut v);
        }
        v
    }

    pub fn output(&self) -> BasisElement {
        self.family.output()
    }

    /// The arguments `(a, b, c, d)` of `M` giving this product's coefficient.
    pub fn constant_exponents(&self) -> [u32; 4] {
        let e = &self.exponents;
        match self.family {
            Family::I | Family::II => [e[0], e[1], e[2], e[3]],
            Family::III | Family::IV => [e[0] + e[4] + 1, e[1], e[2], e[3]],
        }
    }

    /// Recognizes a string of one of the four shapes.
    pub fn parse(inputs: &[BasisElement]) -> Option<ProductIndex> {
        Family::ALL
            .into_iter()
            .find_map(|family| match_family(family, inputs))
    }
}

impl fmt::Display for ProductIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exps: Vec<String> = self.exponents.iter().map(u32::to_string).collect();
        write!(f, "{}({})", self.family, exps.join(","))
    }
}

fn match_family(family: Family, inputs: &[BasisElement]) -> Option<ProductIndex> {
    use BasisElement::*;
    let (x, y, p, q) = match family {
        Family::I | Family::III => (Xi, XiL, Theta, Eta),
        Family::II | Family::IV => (XiL, Xi, Eta, Theta),
    };
    let pattern: &[(BasisElement, bool)] = match family {
        Family::I | Family::II => &[
            (x, true),
            (p, false),
            (y, true),
            (q, false),
            (x, true),
            (p, false),
            (y, true),
        ],
        Family::III | Family::IV => &[
            (x, true),
            (p, false),
            (y, true),
            (q, false),
            (x, true),
            (p, false),
            (y, true),
            (q, false),
            (x, true),
        ],
    };
    let mut pos = 0;
    let mut exps = Vec::new();
    for &(el, is_run) in pattern {
        if is_run {
            let start = pos;
            while pos < inputs.len() && inputs[pos] == el {
                pos += 1;
            }
            exps.push((pos - start) as u32);
        } else {
            if inputs.get(pos) != Some(&el) {
                return None;
            }
            pos += 1;
        }
    }
    (pos == inputs.len()).then_some(ProductIndex {
        family,
        exponents: exps,
    })
}

/// Address of a table entry: a binary product or a higher one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProductKey {
    Binary {
        left: BasisElement,
        right: BasisElement,
    },
    Higher(ProductIndex),
}

impl ProductKey {
    pub fn inputs(&self) -> Vec<BasisElement> {
        match self {
            ProductKey::Binary { left, right } => vec![*left, *right],
            ProductKey::Higher(idx) => idx.inputs(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProductKey::Binary { .. } => "m2".to_string(),
            ProductKey::Higher(idx) => idx.family.to_string(),
        }
    }
}

/// Result of evaluating a product on basis elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProductValue {
    Zero,
    Term {
        coefficient: SeriesValue,
        output: BasisElement,
    },
}

impl ProductValue {
    pub fn is_zero(&self) -> bool {
        matches!(self, ProductValue::Zero)
    }
}

/// The binary composition `x` then `y`, or `None` when it vanishes.
pub fn m2(x: BasisElement, y: BasisElement) -> Option<BasisElement> {
    use BasisElement::*;
    if x.is_identity() {
        return Some(y);
    }
    if y.is_identity() {
        return Some(x);
    }
    match (x, y) {
        (Theta, Eta) => Some(Xi),
        (Eta, Theta) => Some(XiL),
        _ => None,
    }
}

fn sign_pow(e: u32) -> f64 {
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn choose2(n: u32) -> u32 {
    n * n.saturating_sub(1) / 2
}

fn fact(n: u32) -> f64 {
    factorial(n).to_f64().unwrap_or(f64::INFINITY)
}

fn binom(n: u32, k: u32) -> f64 {
    binomial(n, k).to_f64().unwrap_or(f64::INFINITY)
}

/// Evaluator of `phi`, `M` and products over one lattice, caching the underlying `f_{m,n}`.
pub struct StructureConstants {
    series: SeriesContext,
    lattice: Lattice,
}

impl StructureConstants {
    pub fn new(lattice: &Lattice, cfg: &SummationConfig) -> Result<Self> {
        Ok(StructureConstants {
            series: SeriesContext::new(lattice.normalized(), *cfg)?,
            lattice: *lattice,
        })
    }

    /// The lattice as given (constants depend only on its `tau`).
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn config(&self) -> &SummationConfig {
        self.series.config()
    }

    pub fn tau(&self) -> Complex64 {
        self.series.lattice().tau()
    }

    fn im_tau(&self) -> f64 {
        self.tau().im
    }

    fn phi_term(&self, k: u32, l: u32, p: u32) -> (f64, (i32, i32)) {
        let pre = (self.im_tau() / PI).powi((k + l + p + 1) as i32) / (fact(k) * fact(p));
        (pre, ((k + p) as i32, (l + 1) as i32))
    }

    /// `phi(k, l, p) = (a/pi)^{k+l+p+1} f_{k+p, l+1} / (k! p!)` with `a = Im tau`.
    pub fn phi(&self, k: u32, l: u32, p: u32) -> Result<SeriesValue> {
        self.series.evaluate_terms(&[self.phi_term(k, l, p)])
    }

    /// `<m_n(xi^a, theta, xi_L^b, eta, xi^c, theta, xi_L^d), eta>` assembled from `phi` values
    /// over all splittings `a = a1 + a2, c = c1 + c2` and `b = b1 + b2, d = d1 + d2`.
    pub fn m_coeff_comb(&self, a: u32, b: u32, c: u32, d: u32) -> Result<SeriesValue> {
        let n = a + b + c + d + 3;
        let s1 = sign_pow(choose2(n) + 1);
        let s2 = sign_pow(choose2(n) + n + 1);
        let mut terms = Vec::new();
        for a1 in 0..=a {
            for c1 in 0..=c {
                let (a2, c2) = (a - a1, c - c1);
                let w = binom(a2 + b, a2) * binom(a1 + c1, a1) * binom(c2 + d, c2);
                let (pre, idx) = self.phi_term(a2 + b, a1 + c1, c2 + d);
                terms.push((s1 * w * pre, idx));
            }
        }
        for b1 in 0..=b {
            for d1 in 0..=d {
                let (b2, d2) = (b - b1, d - d1);
                let w = binom(c + d1, c) * binom(b2 + d2, b2) * binom(a + b1, a);
                let (pre, idx) = self.phi_term(c + d1, b2 + d2, a + b1);
                terms.push((s2 * w * pre, idx));
            }
        }
        self.series.evaluate_terms(&terms)
    }

    fn m_scaled(&self, a: u32, b: u32, c: u32, d: u32, scale: f64) -> Result<SeriesValue> {
        let s = a + b + c + d;
        let factor = sign_pow(choose2(s + 1)) * scale / (fact(a) * fact(b) * fact(c) * fact(d));
        let terms: Vec<(f64, (i32, i32))> = g_ab_symbolic(a + c, b + d)
            .float_terms()
            .into_iter()
            .map(|(k, v)| (factor * v, k))
            .collect();
        self.series.evaluate_terms(&terms)
    }

    /// `M(a,b,c,d) = (-1)^{C(s+1,2)} (Im tau / pi)^{s+1} g_{a+c,b+d} / (a! b! c! d!)` with
    /// `s = a + b + c + d`.
    pub fn m_direct(&self, a: u32, b: u32, c: u32, d: u32) -> Result<SeriesValue> {
        let s = a + b + c + d;
        self.m_scaled(a, b, c, d, (self.im_tau() / PI).powi((s + 1) as i32))
    }

    /// `M'(a,b,c,d) = (pi / Im tau)^{s+1} M(a,b,c,d)`, computed without the cancelling powers.
    pub fn m_prime(&self, a: u32, b: u32, c: u32, d: u32) -> Result<SeriesValue> {
        self.m_scaled(a, b, c, d, 1.0)
    }

    /// `m_n(inputs)`.
    pub fn product(&self, inputs: &[BasisElement]) -> Result<ProductValue> {
        if inputs.is_empty() {
            return Err(Error::InvalidIndex("empty input string".into()));
        }
        check_composable(inputs)?;
        match inputs.len() {
            1 => Ok(ProductValue::Zero),
            2 => Ok(match m2(inputs[0], inputs[1]) {
                Some(output) => ProductValue::Term {
                    coefficient: SeriesValue::exact(Complex64::new(1.0, 0.0)),
                    output,
                },
                None => ProductValue::Zero,
            }),
            n => {
                if n % 2 == 1 || inputs.iter().any(|b| b.is_identity()) {
                    return Ok(ProductValue::Zero);
                }
                match ProductIndex::parse(inputs) {
                    Some(idx) => self.entry_value(&idx),
                    None => Ok(ProductValue::Zero),
                }
            }
        }
    }

    fn entry_value(&self, idx: &ProductIndex) -> Result<ProductValue> {
        let [a, b, c, d] = idx.constant_exponents();
        Ok(ProductValue::Term {
            coefficient: self.m_direct(a, b, c, d)?,
            output: idx.output(),
        })
    }

    /// Every nonvanishing product of arity at most `n_max`.
    pub fn table(&self, n_max: u32) -> Result<StructureTable> {
        if n_max < 2 {
            return Err(Error::InvalidIndex(format!(
                "n_max = {n_max} must be at least 2"
            )));
        }
        if n_max > MAX_TABLE_ARITY {
            return Err(Error::Budget(format!(
                "n_max = {n_max} exceeds the table limit of {MAX_TABLE_ARITY}"
            )));
        }
        let mut entries = Vec::new();
        for x in BasisElement::ALL {
            for y in BasisElement::ALL {
                if x.target() != y.source() {
                    continue;
                }
                if let Some(out) = m2(x, y) {
                    entries.push(TableEntry {
                        key: ProductKey::Binary { left: x, right: y },
                        arity: 2,
                        inputs: vec![x, y],
                        output: out,
                        coefficient: Complex64::new(1.0, 0.0),
                        tail_bound: 0.0,
                    });
                }
            }
        }
        for n in (4..=n_max).step_by(2) {
            for family in Family::ALL {
                let k = family.exponent_count();
                let total = n - if k == 4 { 3 } else { 4 };
                for exps in compositions(total, k) {
                    let idx = ProductIndex::new(family, &exps)?;
                    if let ProductValue::Term {
                        coefficient,
                        output,
                    } = self.entry_value(&idx)?
                    {
                        entries.push(TableEntry {
                            arity: n,
                            inputs: idx.inputs(),
                            key: ProductKey::Higher(idx),
                            output,
                            coefficient: coefficient.value,
                            tail_bound: coefficient.tail_bound,
                        });
                    }
                }
            }
        }
        Ok(StructureTable {
            lattice: self.lattice,
            tau: self.tau(),
            config: *self.config(),
            n_max,
            entries,
        })
    }
}

/// All `k`-tuples of nonnegative integers summing to `total`, in lexicographic order.
fn compositions(total: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub key: ProductKey,
    pub arity: u32,
    pub inputs: Vec<BasisElement>,
    pub output: BasisElement,
    pub coefficient: Complex64,
    pub tail_bound: f64,
}

/// The products of arity `<= n_max`: the binary ones first, then by arity, family and
/// lexicographic exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureTable {
    pub lattice: Lattice,
    pub tau: Complex64,
    pub config: SummationConfig,
    pub n_max: u32,
    pub entries: Vec<TableEntry>,
}

impl StructureTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &ProductKey) -> Option<&TableEntry> {
        self.entries.iter().find(|e| &e.key == key)
    }
}

pub fn phi(
    lattice: &Lattice,
    k: u32,
    l: u32,
    p: u32,
    cfg: &SummationConfig,
) -> Result<SeriesValue> {
    StructureConstants::new(lattice, cfg)?.phi(k, l, p)
}

pub fn m_coeff_comb(
    lattice: &Lattice,
    a: u32,
    b: u32,
    c: u32,
    d: u32,
    cfg: &SummationConfig,
) -> Result<SeriesValue> {
    StructureConstants::new(lattice, cfg)?.m_coeff_comb(a, b, c, d)
}

pub fn m_direct(
    lattice: &Lattice,
    a: u32,
    b: u32,
    c: u32,
    d: u32,
    cfg: &SummationConfig,
) -> Result<SeriesValue> {
    StructureConstants::new(lattice, cfg)?.m_direct(a, b, c, d)
}

pub fn product_lookup(
    lattice: &Lattice,
    inputs: &[BasisElement],
    cfg: &SummationConfig,
) -> Result<ProductValue> {
    StructureConstants::new(lattice, cfg)?.product(inputs)
}

pub fn full_table(lattice: &Lattice, n_max: u32, cfg: &SummationConfig) -> Result<StructureTable> {
    StructureConstants::new(lattice, cfg)?.table(n_max)
}
