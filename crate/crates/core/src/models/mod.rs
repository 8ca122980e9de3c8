//! Concrete affine models with Frobenius lifts: the affine line, the torus,
//! localized lines, and odd-degree hyperelliptic curves. Reduction of 1-forms
//! to canonical representatives, Frobenius matrices on H^1, primitive
//! existence in the completion and in the dagger ring, and the p-divisibility
//! detector.

pub mod hyperelliptic;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::fp::FpPoly;
use crate::padic::{
    int_valuation, PadicApprox, PadicError, PrecisionPolicy, ScaledPadic, Valuation,
};
use crate::semilinear::{FrobeniusMatrix, SemilinearError};
use crate::series::{
    growth_check_profile, integrate_form, FormBasis, GrowthCertificate, LossLedger, Rat,
    TruncatedSeries,
};

pub use hyperelliptic::{HyperForm, HyperReduction};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("special fibre not smooth: {0}")]
    NotSmooth(String),
    #[error("precision exhausted in {step}: {detail}")]
    PrecisionExhausted { step: String, detail: String },
    #[error("precision too low for depth {depth} at cap {cap}")]
    PrecisionTooLow { depth: u32, cap: u32 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Semilinear(#[from] SemilinearError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelKind {
    AffineLine,
    Torus,
    /// Z_p<t, 1/f> for an integer polynomial f; supported when f mod p is a
    /// unit constant (the completion is then Z_p<t>).
    LocalizedLine(Vec<i64>),
    /// y^2 = f(x) with f monic, odd degree, squarefree mod p; p odd.
    Hyperelliptic(Vec<i64>),
}

#[derive(Debug, Clone)]
pub struct AffineModel {
    pub kind: ModelKind,
    pub prime: u64,
    pub policy: PrecisionPolicy,
}

impl AffineModel {
    pub fn affine_line(prime: u64, policy: PrecisionPolicy) -> Self {
        AffineModel {
            kind: ModelKind::AffineLine,
            prime,
            policy,
        }
    }

    pub fn torus(prime: u64, policy: PrecisionPolicy) -> Self {
        AffineModel {
            kind: ModelKind::Torus,
            prime,
            policy: PrecisionPolicy {
                low_degree: -policy.cap_degree,
                ..policy
            },
        }
    }

    pub fn localized_line(
        prime: u64,
        policy: PrecisionPolicy,
        f: Vec<i64>,
    ) -> Result<Self, ModelError> {
        let fp = FpPoly::from_coeffs(prime, &f);
        if fp.degree() == Some(0) || fp.degree().is_none() {
            if fp.is_zero() {
                return Err(ModelError::NotSmooth("f is zero mod p".into()));
            }
            // unit constant mod p: completion is Z_p<t>
            Ok(AffineModel {
                kind: ModelKind::LocalizedLine(f),
                prime,
                policy,
            })
        } else if fp.is_squarefree() {
            Err(ModelError::Unsupported(
                "localized line with non-unit separable f: reductions not implemented; \
                 use the torus model for f = t"
                    .into(),
            ))
        } else {
            Err(ModelError::NotSmooth(
                "f mod p neither a unit nor separable".into(),
            ))
        }
    }

    pub fn hyperelliptic(
        prime: u64,
        policy: PrecisionPolicy,
        f: Vec<i64>,
    ) -> Result<Self, ModelError> {
        if prime == 2 {
            return Err(ModelError::Invalid("p must be odd for hyperelliptic".into()));
        }
        let fp = FpPoly::from_coeffs(prime, &f);
        let deg = fp
            .degree()
            .ok_or_else(|| ModelError::NotSmooth("f vanishes mod p".into()))?;
        if deg % 2 == 0 || deg < 3 {
            return Err(ModelError::Invalid(format!(
                "hyperelliptic model needs odd degree >= 3, got {deg}"
            )));
        }
        if !fp.is_squarefree() {
            return Err(ModelError::NotSmooth("f not squarefree mod p".into()));
        }
        Ok(AffineModel {
            kind: ModelKind::Hyperelliptic(f),
            prime,
            policy,
        })
    }

    pub fn genus(&self) -> usize {
        match &self.kind {
            ModelKind::Hyperelliptic(f) => {
                let d = FpPoly::from_coeffs(self.prime, f).degree().unwrap_or(0);
                (d - 1) / 2
            }
            _ => 0,
        }
    }

    /// Rank of H^1 in the canonical basis.
    pub fn betti1(&self) -> usize {
        match &self.kind {
            ModelKind::AffineLine | ModelKind::LocalizedLine(_) => 0,
            ModelKind::Torus => 1,
            ModelKind::Hyperelliptic(_) => 2 * self.genus(),
        }
    }

    /// Model file line: `kind=<...> p=<prime> N=<cap> D=<deg> f=<poly>`.
    pub fn to_file_line(&self) -> String {
        let (kind, f) = match &self.kind {
            ModelKind::AffineLine => ("affine_line", None),
            ModelKind::Torus => ("torus", None),
            ModelKind::LocalizedLine(f) => ("localized_line", Some(f)),
            ModelKind::Hyperelliptic(f) => ("hyperelliptic", Some(f)),
        };
        let mut s = format!(
            "kind={kind} p={} N={} D={}",
            self.prime, self.policy.cap_n, self.policy.cap_degree
        );
        if let Some(f) = f {
            s.push_str(&format!(" f={}", poly_to_string(f)));
        }
        s
    }

    pub fn from_file_line(line: &str) -> Result<Self, ModelError> {
        let mut kind = None;
        let mut prime = None;
        let mut cap_n = None;
        let mut cap_d = None;
        let mut f = None;
        for field in line.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| ModelError::Invalid(format!("bad field {field:?}")))?;
            match k {
                "kind" => kind = Some(v.to_string()),
                "p" => {
                    prime = Some(v.parse::<u64>().map_err(|_| {
                        ModelError::Invalid(format!("bad prime {v:?}"))
                    })?)
                }
                "N" => {
                    cap_n = Some(v.parse::<u32>().map_err(|_| {
                        ModelError::Invalid(format!("bad N {v:?}"))
                    })?)
                }
                "D" => {
                    cap_d = Some(v.parse::<i64>().map_err(|_| {
                        ModelError::Invalid(format!("bad D {v:?}"))
                    })?)
                }
                "f" => f = Some(parse_poly(v)?),
                _ => return Err(ModelError::Invalid(format!("unknown field {k:?}"))),
            }
        }
        let kind = kind.ok_or_else(|| ModelError::Invalid("missing kind=".into()))?;
        let prime = prime.ok_or_else(|| ModelError::Invalid("missing p=".into()))?;
        let cap_n = cap_n.ok_or_else(|| ModelError::Invalid("missing N=".into()))?;
        let cap_d = cap_d.ok_or_else(|| ModelError::Invalid("missing D=".into()))?;
        let policy = PrecisionPolicy::new(cap_n, cap_d);
        match kind.as_str() {
            "affine_line" => Ok(AffineModel::affine_line(prime, policy)),
            "torus" => Ok(AffineModel::torus(prime, policy)),
            "localized_line" => AffineModel::localized_line(
                prime,
                policy,
                f.ok_or_else(|| ModelError::Invalid("localized_line needs f=".into()))?,
            ),
            "hyperelliptic" => AffineModel::hyperelliptic(
                prime,
                policy,
                f.ok_or_else(|| ModelError::Invalid("hyperelliptic needs f=".into()))?,
            ),
            other => Err(ModelError::Invalid(format!("unknown kind {other:?}"))),
        }
    }
}

/// Integer polynomial in x, e.g. `x^3+x+1` or `2x^2-3`.
pub fn parse_poly(s: &str) -> Result<Vec<i64>, ModelError> {
    let cleaned: String = s.chars().filter(|&c| c != ' ' && c != '*').collect();
    let mut coeffs: Vec<i64> = Vec::new();
    let mut push = |deg: usize, c: i64| {
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, 0);
        }
        coeffs[deg] += c;
    };
    // Split into signed terms.
    let norm = cleaned.replace('-', "+-");
    for term in norm.split('+') {
        if term.is_empty() {
            continue;
        }
        let (var, coeff_str, deg_str) = if let Some(idx) = term.find('x') {
            (true, &term[..idx], term[idx + 1..].strip_prefix('^'))
        } else {
            (false, term, None)
        };
        let c: i64 = match coeff_str {
            "" => 1,
            "-" => -1,
            other => other
                .parse()
                .map_err(|_| ModelError::Invalid(format!("bad coefficient {other:?} in {s:?}")))?,
        };
        let deg = if !var {
            0
        } else {
            match deg_str {
                None => 1,
                Some(d) => d
                    .parse()
                    .map_err(|_| ModelError::Invalid(format!("bad exponent in {s:?}")))?,
            }
        };
        push(deg, c);
    }
    while coeffs.last() == Some(&0) {
        coeffs.pop();
    }
    Ok(coeffs)
}

pub fn poly_to_string(coeffs: &[i64]) -> String {
    if coeffs.iter().all(|&c| c == 0) {
        return "0".to_string();
    }
    let mut out = String::new();
    for (deg, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let sign = if c < 0 {
            "-"
        } else if out.is_empty() {
            ""
        } else {
            "+"
        };
        let a = c.unsigned_abs();
        let body = match deg {
            0 => format!("{a}"),
            1 if a == 1 => "x".to_string(),
            1 => format!("{a}x"),
            _ if a == 1 => format!("x^{deg}"),
            _ => format!("{a}x^{deg}"),
        };
        out.push_str(sign);
        out.push_str(&body);
    }
    out
}

/// A 0- or 1-form on a model, in the model's coordinate representation.
#[derive(Debug, Clone)]
pub enum FormClass {
    /// Degree-1 form on a series model: series paired with the basis symbol.
    SeriesForm {
        series: TruncatedSeries,
        basis: FormBasis,
    },
    /// Degree-0 element of a series model.
    SeriesFn(TruncatedSeries),
    /// Degree-1 form on a hyperelliptic model (odd part).
    HyperForm(HyperForm),
}

impl FormClass {
    pub fn degree(&self) -> u8 {
        match self {
            FormClass::SeriesFn(_) => 0,
            _ => 1,
        }
    }

    pub fn series(&self) -> Option<&TruncatedSeries> {
        match self {
            FormClass::SeriesForm { series, .. } | FormClass::SeriesFn(series) => Some(series),
            _ => None,
        }
    }
}

/// Result of reducing a 1-form to the canonical basis.
#[derive(Debug, Clone)]
pub struct Reduction {
    /// Coordinates in the model's H^1 basis.
    pub canonical: Vec<ScaledPadic>,
    /// Witness g with omega = canonical + dg at ledger precision.
    pub witness: FormClass,
    pub ledger: LossLedger,
}

#[derive(Debug, Clone)]
pub struct CohomologyMatrix {
    pub basis: Vec<String>,
    pub matrix: FrobeniusMatrix,
    pub reduction_log: Vec<String>,
}

/// Convert a 1-form series between the dt and dlog bases on a Laurent window:
/// f dt = (t f) dlog t.
pub fn convert_basis(
    series: &TruncatedSeries,
    from: FormBasis,
    to: FormBasis,
) -> TruncatedSeries {
    if from == to {
        return series.clone();
    }
    let shift = match (from, to) {
        (FormBasis::Dt, FormBasis::Dlog) => 1,
        (FormBasis::Dlog, FormBasis::Dt) => -1,
        _ => 0,
    };
    let mut out = TruncatedSeries::zero(series.prime(), series.policy());
    for (d, c) in series.terms() {
        let nd = d + shift;
        if nd >= series.policy().low_degree && nd <= series.policy().cap_degree {
            out.set(nd, *c);
        }
    }
    out
}

/// Reduce a degree-1 form to the canonical basis with an exact-primitive
/// witness. Torus: c * dlog t; AffineLine and unit LocalizedLine: 0;
/// Hyperelliptic: span{x^i dx/y}.
pub fn reduce_class(m: &AffineModel, omega: &FormClass) -> Result<Reduction, ModelError> {
    match (&m.kind, omega) {
        (ModelKind::Torus, FormClass::SeriesForm { series, basis }) => {
            let s = convert_basis(series, *basis, FormBasis::Dlog);
            let residue = s.coeff(0);
            let mut rest = s.clone();
            rest.set(0, PadicApprox::exact_zero(m.prime, m.policy.cap_n));
            let (g, ledger) = integrate_form(&rest, FormBasis::Dlog).map_err(map_reduce_err)?;
            Ok(Reduction {
                canonical: vec![ScaledPadic::new(0, residue)],
                witness: FormClass::SeriesFn(g),
                ledger,
            })
        }
        (
            ModelKind::AffineLine | ModelKind::LocalizedLine(_),
            FormClass::SeriesForm { series, basis },
        ) => {
            let s = convert_basis(series, *basis, FormBasis::Dt);
            let (g, ledger) = integrate_form(&s, FormBasis::Dt).map_err(map_reduce_err)?;
            Ok(Reduction {
                canonical: vec![],
                witness: FormClass::SeriesFn(g),
                ledger,
            })
        }
        (ModelKind::Hyperelliptic(f), FormClass::HyperForm(h)) => {
            let red = hyperelliptic::reduce_form(m.prime, f, m.policy.cap_n, h)?;
            Ok(Reduction {
                canonical: red.canonical,
                witness: FormClass::HyperForm(red.witness_differential_check),
                ledger: red.ledger,
            })
        }
        _ => Err(ModelError::Invalid(
            "form representation does not match the model".into(),
        )),
    }
}

fn map_reduce_err(e: PadicError) -> ModelError {
    match e {
        PadicError::PrecisionExhausted(d) => ModelError::PrecisionExhausted {
            step: "integration".into(),
            detail: d,
        },
        PadicError::ValuationUnderflow { degree, valuation } => ModelError::PrecisionExhausted {
            step: "integration".into(),
            detail: format!("valuation underflow at degree {degree} ({valuation})"),
        },
        other => ModelError::Padic(other),
    }
}

/// Matrix of the lifted Frobenius on the canonical H^1 basis.
pub fn frobenius_matrix(m: &AffineModel) -> Result<CohomologyMatrix, ModelError> {
    match &m.kind {
        ModelKind::AffineLine | ModelKind::LocalizedLine(_) => Ok(CohomologyMatrix {
            basis: vec![],
            matrix: FrobeniusMatrix::zero(m.prime, 0),
            reduction_log: vec!["H^1 = 0".into()],
        }),
        ModelKind::Torus => {
            // F(dlog t) = dlog t^p = p dlog t.
            let mut mat = FrobeniusMatrix::zero(m.prime, 1);
            mat.set(
                0,
                0,
                ScaledPadic::from_int(m.prime, m.prime as i64, m.policy.cap_n),
            );
            Ok(CohomologyMatrix {
                basis: vec!["dlog t".into()],
                matrix: mat,
                reduction_log: vec!["F(dlog t) = p dlog t".into()],
            })
        }
        ModelKind::Hyperelliptic(f) => hyperelliptic::frobenius_matrix(m.prime, f, m.policy.cap_n),
    }
}

/// Outcome of searching a primitive in the p-adic completion.
#[derive(Debug, Clone)]
pub enum CompletionPrimitive {
    Some {
        primitive: FormClass,
        ledger: LossLedger,
    },
    /// The residue coefficient is a unit at precision.
    ResidueObstruction { residue: u64, precision: u32 },
    /// The formal primitive has coefficients of negative valuation.
    UnderflowObstruction { witness: Vec<(i64, i64)> },
}

impl CompletionPrimitive {
    pub fn is_some(&self) -> bool {
        matches!(self, CompletionPrimitive::Some { .. })
    }
}

/// Attempt dg = omega in the p-adically completed model. Obstructions are
/// return values, not errors.
pub fn primitive_in_completion(
    m: &AffineModel,
    omega: &FormClass,
) -> Result<CompletionPrimitive, ModelError> {
    let FormClass::SeriesForm { series, basis } = omega else {
        return Err(ModelError::Unsupported(
            "completion primitives are computed on series models".into(),
        ));
    };
    let _ = m;
    // Residue check first.
    let resid = match basis {
        FormBasis::Dlog => series.coeff(0),
        FormBasis::Dt => series.coeff(-1),
    };
    if !resid.is_zero() {
        return Ok(CompletionPrimitive::ResidueObstruction {
            residue: resid.value(),
            precision: resid.precision(),
        });
    }
    // Scan formal valuations for underflow before dividing.
    let profile = series.primitive_valuations(*basis);
    let negatives: Vec<(i64, i64)> = profile.iter().copied().filter(|&(_, v)| v < 0).collect();
    if !negatives.is_empty() {
        return Ok(CompletionPrimitive::UnderflowObstruction { witness: negatives });
    }
    let (g, ledger) = integrate_form(series, *basis).map_err(map_reduce_err)?;
    Ok(CompletionPrimitive::Some {
        primitive: FormClass::SeriesFn(g),
        ledger,
    })
}

/// Dagger membership: the completion primitive must additionally satisfy the
/// linear growth bound val(a_n) >= c n - d over the stored window.
pub fn primitive_in_dagger(
    m: &AffineModel,
    omega: &FormClass,
    c: Rat,
    d: Rat,
) -> Result<(Option<FormClass>, GrowthCertificate), ModelError> {
    let completion = primitive_in_completion(m, omega)?;
    match completion {
        CompletionPrimitive::Some { primitive, .. } => {
            let FormClass::SeriesFn(ref g) = primitive else {
                unreachable!()
            };
            let cert = crate::series::growth_check(g, c, d);
            if cert.holds() {
                Ok((Some(primitive), cert))
            } else {
                Ok((None, cert))
            }
        }
        CompletionPrimitive::ResidueObstruction { .. } => {
            let cert = growth_check_profile(&[], c, d, (0, 0));
            Ok((
                None,
                GrowthCertificate {
                    violations: vec![0],
                    ..cert
                },
            ))
        }
        CompletionPrimitive::UnderflowObstruction { witness } => {
            // Formal primitive exists only with negative valuations; every
            // positive growth bound fails at those degrees.
            let profile: Vec<(i64, Option<i64>)> =
                witness.iter().map(|&(n, v)| (n, Some(v))).collect();
            let range = (
                profile.first().map(|&(n, _)| n).unwrap_or(0),
                profile.last().map(|&(n, _)| n).unwrap_or(0),
            );
            Ok((None, growth_check_profile(&profile, c, d, range)))
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub enum DivisibilityVerdict {
    DivisibleToDepth(u32),
    ObstructedAt { depth: u32, residue_unit: u64 },
}

/// Chain witness for one division step.
#[derive(Debug, Clone)]
pub struct ChainStep {
    /// x_k with [x_{k-1}] = p [x_k] + d(g_k) + torsion.
    pub next: FormClass,
    /// Exact primitive part.
    pub exact_witness: FormClass,
    /// Degrees parked as torsion classes, with their p-power orders.
    pub torsion: Vec<(i64, u32)>,
}

#[derive(Debug)]
pub struct DivisibilityCertificate {
    pub depth_requested: u32,
    pub verdict: DivisibilityVerdict,
    pub chain: Vec<ChainStep>,
}

/// Greedy chain construction x_{k-1} = p x_k + d g_k + (bounded torsion).
///
/// Classes are split coefficient-wise: canonical-basis coordinates must keep
/// losing a factor p at every step (a unit coordinate obstructs), exactly
/// integrable coefficients go to the witness, and unit coefficients in
/// torsion slots (degree weight divisible by p) are parked as torsion of the
/// recorded order, which is bounded by the degree window.
pub fn divisible_class_test(
    m: &AffineModel,
    omega: &FormClass,
    depth: u32,
) -> Result<DivisibilityCertificate, ModelError> {
    if depth + 2 > m.policy.cap_n {
        return Err(ModelError::PrecisionTooLow {
            depth,
            cap: m.policy.cap_n,
        });
    }
    let FormClass::SeriesForm { series, basis } = omega else {
        return Err(ModelError::Unsupported(
            "divisibility chains are built on series models".into(),
        ));
    };
    let prime = m.prime;
    // Work in the dlog basis on the torus, dt basis otherwise.
    let canonical_residue = matches!(m.kind, ModelKind::Torus);
    let work_basis = if canonical_residue {
        FormBasis::Dlog
    } else {
        FormBasis::Dt
    };
    let mut current = convert_basis(series, *basis, work_basis);
    let mut chain = Vec::new();
    for k in 1..=depth {
        let mut next = TruncatedSeries::zero(prime, current.policy());
        let mut exact = TruncatedSeries::zero(prime, current.policy());
        let mut torsion = Vec::new();
        for (deg, coeff) in current.clone().terms() {
            if coeff.is_zero() {
                continue;
            }
            let is_residue_slot = canonical_residue && deg == 0;
            let weight = match work_basis {
                FormBasis::Dlog => deg,
                FormBasis::Dt => deg + 1,
            };
            let val = match coeff.valuation() {
                Valuation::Infinite => continue,
                Valuation::Finite(v) => v,
            };
            if is_residue_slot {
                // Free coordinate: must divide by p on the nose.
                if val >= 1 {
                    next.set(deg, coeff.divide_p_pow(1)?);
                    continue;
                }
                return Ok(DivisibilityCertificate {
                    depth_requested: depth,
                    verdict: DivisibilityVerdict::ObstructedAt {
                        depth: k,
                        residue_unit: coeff.value() % prime,
                    },
                    chain,
                });
            }
            let weight_val = if weight == 0 {
                0
            } else {
                int_valuation(prime, weight)
            };
            if val >= weight_val {
                // Exactly integrable: goes to the witness.
                exact.set(deg, *coeff);
            } else if val >= 1 {
                next.set(deg, coeff.divide_p_pow(1)?);
            } else {
                // Unit coefficient in a torsion slot: the class has order
                // p^weight_val, bounded by the degree window.
                torsion.push((deg, weight_val));
            }
        }
        let (g, _) = integrate_form(&exact, work_basis).map_err(map_reduce_err)?;
        chain.push(ChainStep {
            next: FormClass::SeriesForm {
                series: next.clone(),
                basis: work_basis,
            },
            exact_witness: FormClass::SeriesFn(g),
            torsion,
        });
        current = next;
    }
    Ok(DivisibilityCertificate {
        depth_requested: depth,
        verdict: DivisibilityVerdict::DivisibleToDepth(depth),
        chain,
    })
}

/// Idempotent pair in the p-adic completion of Z[x, u]/(x^2 - 1 - p u),
/// built by Newton iteration e <- 3e^2 - 2e^3 from e_0 = (1+x)/2.
///
/// Elements are a(u) + b(u) x with truncated series coefficients.
#[derive(Debug, Clone)]
pub struct QuadraticRingElt {
    pub plain: TruncatedSeries,
    pub xpart: TruncatedSeries,
}

pub fn hensel_idempotent(
    prime: u64,
    u_param: &TruncatedSeries,
    precision: u32,
) -> Result<(QuadraticRingElt, QuadraticRingElt), ModelError> {
    if prime == 2 {
        return Err(ModelError::Invalid(
            "idempotent splitting needs p odd".into(),
        ));
    }
    let policy = u_param.policy();
    let half = PadicApprox::new(prime, 2, precision)
        .inverse()
        .map_err(ModelError::Padic)?;
    // x^2 = 1 + p*u
    let xsq = {
        let mut one = TruncatedSeries::one(prime, policy);
        let pu = u_param.scale(&PadicApprox::new(prime, prime as i64, precision))?;
        one = one.add(&pu)?;
        one
    };
    let mul = |a: &QuadraticRingElt, b: &QuadraticRingElt| -> Result<QuadraticRingElt, ModelError> {
        // (a0 + a1 x)(b0 + b1 x) = a0 b0 + a1 b1 x^2 + (a0 b1 + a1 b0) x
        let plain = a
            .plain
            .mul(&b.plain)?
            .add(&a.xpart.mul(&b.xpart)?.mul(&xsq)?)?;
        let xpart = a.plain.mul(&b.xpart)?.add(&a.xpart.mul(&b.plain)?)?;
        Ok(QuadraticRingElt { plain, xpart })
    };
    let scale = |a: &QuadraticRingElt, k: &PadicApprox| -> Result<QuadraticRingElt, ModelError> {
        Ok(QuadraticRingElt {
            plain: a.plain.scale(k)?,
            xpart: a.xpart.scale(k)?,
        })
    };
    let sub = |a: &QuadraticRingElt, b: &QuadraticRingElt| -> Result<QuadraticRingElt, ModelError> {
        Ok(QuadraticRingElt {
            plain: a.plain.sub(&b.plain)?,
            xpart: a.xpart.sub(&b.xpart)?,
        })
    };
    // e0 = (1 + x)/2
    let mut e = QuadraticRingElt {
        plain: TruncatedSeries::one(prime, policy).scale(&half)?,
        xpart: TruncatedSeries::one(prime, policy).scale(&half)?,
    };
    let three = PadicApprox::new(prime, 3, precision);
    let two = PadicApprox::new(prime, 2, precision);
    for _ in 0..(32 - precision.leading_zeros() + 2) {
        // e <- 3 e^2 - 2 e^3
        let e2 = mul(&e, &e)?;
        let e3 = mul(&e2, &e)?;
        e = sub(&scale(&e2, &three)?, &scale(&e3, &two)?)?;
        let defect = sub(&mul(&e, &e)?, &e)?;
        if defect.plain.is_zero_at_precision() && defect.xpart.is_zero_at_precision() {
            break;
        }
    }
    let defect = sub(&mul(&e, &e)?, &e)?;
    if !(defect.plain.is_zero_at_precision() && defect.xpart.is_zero_at_precision()) {
        return Err(ModelError::PrecisionExhausted {
            step: "idempotent iteration".into(),
            detail: "e^2 - e did not vanish at precision".into(),
        });
    }
    let complement = QuadraticRingElt {
        plain: TruncatedSeries::one(prime, policy).sub(&e.plain)?,
        xpart: e.xpart.neg(),
    };
    Ok((e, complement))
}

/// Exhaustive point count of y^2 = f(x) over F_p, including the single point
/// at infinity of the odd-degree model. Independent of the cohomological
/// pipeline; serves as its oracle.
pub fn point_count(prime: u64, f: &[i64]) -> u64 {
    let fp = FpPoly::from_coeffs(prime, f);
    let mut squares = vec![false; prime as usize];
    for x in 0..prime {
        squares[(x * x % prime) as usize] = true;
    }
    let mut count = 1u64; // point at infinity
    for x in 0..prime {
        let mut v: u64 = 0;
        for i in (0..=fp.degree().unwrap_or(0)).rev() {
            v = (v * x + fp.coeff(i)) % prime;
        }
        if v == 0 {
            count += 1;
        } else if squares[v as usize] {
            count += 2;
        }
    }
    count
}

/// Trace of Frobenius from the point count: a = p + 1 - #C(F_p).
pub fn frobenius_trace_from_count(prime: u64, f: &[i64]) -> i64 {
    prime as i64 + 1 - point_count(prime, f) as i64
}

impl fmt::Display for DivisibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivisibilityVerdict::DivisibleToDepth(n) => write!(f, "divisible_to_depth {n}"),
            DivisibilityVerdict::ObstructedAt {
                depth,
                residue_unit,
            } => write!(f, "obstructed_at {depth} (residue unit {residue_unit})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PrecisionPolicy;

    fn line(prime: u64, n: u32, d: i64) -> AffineModel {
        AffineModel::affine_line(prime, PrecisionPolicy::new(n, d))
    }

    fn torus(prime: u64, n: u32, d: i64) -> AffineModel {
        AffineModel::torus(prime, PrecisionPolicy::new(n, d))
    }

    #[test]
    fn reduce_torus_examples() {
        let m = torus(5, 8, 40);
        // t^3 dlog t -> canonical 0, witness t^3/3
        let omega = FormClass::SeriesForm {
            series: TruncatedSeries::monomial(5, m.policy, 3, 1),
            basis: FormBasis::Dlog,
        };
        let red = reduce_class(&m, &omega).unwrap();
        assert!(red.canonical[0].is_zero());
        let FormClass::SeriesFn(w) = &red.witness else {
            panic!()
        };
        let third = PadicApprox::new(5, 3, 8).inverse().unwrap();
        assert_eq!(w.coeff(3).value(), third.value());
        // dlog t -> canonical dlog t, witness 0
        let omega2 = FormClass::SeriesForm {
            series: TruncatedSeries::one(5, m.policy),
            basis: FormBasis::Dlog,
        };
        let red2 = reduce_class(&m, &omega2).unwrap();
        assert_eq!(red2.canonical[0].valuation(), Some(0));
        let FormClass::SeriesFn(w2) = &red2.witness else {
            panic!()
        };
        assert!(w2.is_zero_at_precision());
    }

    #[test]
    fn reduce_affine_line() {
        let m = line(5, 8, 40);
        let omega = FormClass::SeriesForm {
            series: TruncatedSeries::monomial(5, m.policy, 7, 1),
            basis: FormBasis::Dt,
        };
        let red = reduce_class(&m, &omega).unwrap();
        assert!(red.canonical.is_empty());
        let FormClass::SeriesFn(w) = &red.witness else {
            panic!()
        };
        let eighth = PadicApprox::new(5, 8, 8).inverse().unwrap();
        assert_eq!(w.coeff(8).value(), eighth.value());
    }

    #[test]
    fn torus_frobenius_is_p() {
        let m = torus(7, 6, 30);
        let cm = frobenius_matrix(&m).unwrap();
        assert_eq!(cm.matrix.dim(), 1);
        assert_eq!(cm.matrix.get(0, 0).valuation(), Some(1));
        // F^k(dlog t) = p^k dlog t: matrix power is exact
        let p3 = cm.matrix.pow(3).unwrap();
        assert_eq!(p3.get(0, 0).valuation(), Some(3));
    }

    #[test]
    fn completion_primitive_log_series() {
        // omega = p dt/(1+pt) on the localized line: expanded series
        // p * sum (-p)^n t^n dt; the primitive is the log series.
        let p: u64 = 5;
        let pol = PrecisionPolicy::new(12, 60);
        let m = AffineModel::localized_line(p, pol, vec![1, p as i64]).unwrap();
        let mut s = TruncatedSeries::zero(p, pol);
        let mut c = PadicApprox::new(p, p as i64, 12);
        for n in 0..=pol.cap_degree {
            s.set(n, c);
            c = c.mul_i64(-(p as i64));
        }
        let omega = FormClass::SeriesForm {
            series: s,
            basis: FormBasis::Dt,
        };
        let out = primitive_in_completion(&m, &omega).unwrap();
        let CompletionPrimitive::Some { primitive, .. } = out else {
            panic!("expected a completion primitive")
        };
        let FormClass::SeriesFn(g) = primitive else {
            panic!()
        };
        // Spot-check against the term-wise oracle at degree 5: p^5/5 has
        // valuation 4.
        assert_eq!(g.coeff(5).valuation(), Valuation::Finite(4));
        assert_eq!(g.coeff(1).value(), 5);
    }

    #[test]
    fn completion_obstructions() {
        let p: u64 = 5;
        let m = torus(p, 8, 650);
        // dlog t: residue obstruction
        let omega = FormClass::SeriesForm {
            series: TruncatedSeries::one(p, m.policy),
            basis: FormBasis::Dlog,
        };
        let out = primitive_in_completion(&m, &omega).unwrap();
        assert!(matches!(
            out,
            CompletionPrimitive::ResidueObstruction { residue: 1, .. }
        ));
        // slope-half ladder sum p^i t^{p^{2i}} dlog t: underflow with
        // valuations -i.
        let line_m = line(p, 8, 650);
        let mut s = TruncatedSeries::zero(p, line_m.policy);
        s.set(1, PadicApprox::new(p, 1, 8));
        s.set(25, PadicApprox::new(p, 5, 8));
        s.set(625, PadicApprox::new(p, 25, 8));
        let omega2 = FormClass::SeriesForm {
            series: s,
            basis: FormBasis::Dlog,
        };
        let out2 = primitive_in_completion(&line_m, &omega2).unwrap();
        let CompletionPrimitive::UnderflowObstruction { witness } = out2 else {
            panic!("expected underflow")
        };
        assert_eq!(witness, vec![(25, -1), (625, -2)]);
    }

    #[test]
    fn divisibility_examples() {
        let p: u64 = 5;
        // dlog t on the torus: obstructed at depth 1.
        let m = torus(p, 8, 40);
        let omega = FormClass::SeriesForm {
            series: TruncatedSeries::one(p, m.policy),
            basis: FormBasis::Dlog,
        };
        let cert = divisible_class_test(&m, &omega, 3).unwrap();
        assert_eq!(
            cert.verdict,
            DivisibilityVerdict::ObstructedAt {
                depth: 1,
                residue_unit: 1
            }
        );
        // The ladder class on the affine line: divisible to depth N-2.
        let lm = line(p, 8, 650);
        let mut s = TruncatedSeries::zero(p, lm.policy);
        s.set(1, PadicApprox::new(p, 1, 8));
        s.set(25, PadicApprox::new(p, 5, 8));
        s.set(625, PadicApprox::new(p, 25, 8));
        let omega2 = FormClass::SeriesForm {
            series: s,
            basis: FormBasis::Dlog,
        };
        let cert2 = divisible_class_test(&lm, &omega2, 6).unwrap();
        assert_eq!(cert2.verdict, DivisibilityVerdict::DivisibleToDepth(6));
        // Exact form: zero chain all the way.
        let omega3 = FormClass::SeriesForm {
            series: TruncatedSeries::monomial(p, lm.policy, 3, 1),
            basis: FormBasis::Dt,
        };
        let cert3 = divisible_class_test(&lm, &omega3, 6).unwrap();
        assert_eq!(cert3.verdict, DivisibilityVerdict::DivisibleToDepth(6));
        for step in &cert3.chain {
            let FormClass::SeriesForm { series, .. } = &step.next else {
                panic!()
            };
            assert!(series.is_zero_at_precision());
        }
    }

    #[test]
    fn divisible_class_is_rationally_exact() {
        // A class divisible to full depth maps to zero in the degree-capped
        // completed cohomology after clearing its bounded torsion: p^T omega
        // integrates integrally for T = max(weight valuation - coefficient
        // valuation) over the window.
        let p: u64 = 5;
        let m = line(p, 8, 650);
        let mut s = TruncatedSeries::zero(p, m.policy);
        s.set(1, PadicApprox::new(p, 1, 8));
        s.set(25, PadicApprox::new(p, 5, 8));
        s.set(625, PadicApprox::new(p, 25, 8));
        let omega = FormClass::SeriesForm {
            series: s.clone(),
            basis: FormBasis::Dlog,
        };
        let cert = divisible_class_test(&m, &omega, 6).unwrap();
        assert_eq!(cert.verdict, DivisibilityVerdict::DivisibleToDepth(6));
        // torsion clearing exponent: weights p^{2i} have valuation 2i while
        // the coefficients have valuation i
        let t_clear = 2;
        let scaled = s.mul_p_pow(t_clear).truncate_precision(8 - t_clear);
        let (g, _) = integrate_form(&scaled, FormBasis::Dlog).expect("integral primitive");
        assert!(!g.is_zero_at_precision());
    }

    #[test]
    fn hensel_idempotent_splits() {
        let p: u64 = 5;
        let pol = PrecisionPolicy::new(6, 24);
        // u = y (the generic quadratic presentation x^2 = 1 + 5y)
        let u = TruncatedSeries::monomial(p, pol, 1, 1);
        let (e, comp) = hensel_idempotent(p, &u, 6).unwrap();
        // e is nontrivial mod p
        assert!(!e.plain.is_zero_at_precision());
        assert!(!e.xpart.is_zero_at_precision());
        // e + (1 - e) = 1
        let sum_plain = e.plain.add(&comp.plain).unwrap();
        assert_eq!(sum_plain.coeff(0).value(), 1);
        let sum_x = e.xpart.add(&comp.xpart).unwrap();
        assert!(sum_x.is_zero_at_precision());
        // u = 0 gives exactly (1+x)/2
        let u0 = TruncatedSeries::zero(p, pol);
        let (e0, _) = hensel_idempotent(p, &u0, 6).unwrap();
        let half = PadicApprox::new(p, 2, 6).inverse().unwrap().value();
        assert_eq!(e0.plain.coeff(0).value(), half);
        assert_eq!(e0.xpart.coeff(0).value(), half);
        // p = 2 unsupported
        let u2 = TruncatedSeries::zero(2, PrecisionPolicy::new(6, 4));
        assert!(hensel_idempotent(2, &u2, 6).is_err());
    }

    #[test]
    fn point_count_oracle_basics() {
        // y^2 = x^3 + x + 1 over F_7: trace 3.
        assert_eq!(frobenius_trace_from_count(7, &[1, 1, 0, 1]), 3);
        // y^2 = x^3 - x over F_5 (supersingular-ish: trace 0 for p = 5? count!)
        let a = frobenius_trace_from_count(5, &[0, -1, 0, 1]);
        assert!(a.unsigned_abs() <= 2 * (5f64.sqrt() as u64) + 1);
    }

    #[test]
    fn model_file_roundtrip() {
        let m = AffineModel::hyperelliptic(7, PrecisionPolicy::new(6, 100), vec![1, 1, 0, 1])
            .unwrap();
        let line = m.to_file_line();
        assert_eq!(line, "kind=hyperelliptic p=7 N=6 D=100 f=x^3+x+1");
        let back = AffineModel::from_file_line(&line).unwrap();
        assert_eq!(back.kind, m.kind);
        let t = AffineModel::from_file_line("kind=torus p=5 N=8 D=300").unwrap();
        assert_eq!(t.kind, ModelKind::Torus);
        assert_eq!(t.policy.low_degree, -300);
    }

    #[test]
    fn poly_parser() {
        assert_eq!(parse_poly("x^3+x+1").unwrap(), vec![1, 1, 0, 1]);
        assert_eq!(parse_poly("2x^2-3").unwrap(), vec![-3, 0, 2]);
        assert_eq!(parse_poly("-x").unwrap(), vec![0, -1]);
        assert_eq!(poly_to_string(&[1, 1, 0, 1]), "x^3+x+1");
        assert_eq!(poly_to_string(&[-3, 0, 2]), "2x^2-3");
    }
}
