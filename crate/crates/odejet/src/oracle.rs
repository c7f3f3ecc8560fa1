//! Independent numeric cross-validation.
//!
//! Everything here checks the symbolic engine *from the outside*: concrete
//! polynomial maps and curves are sampled, their transformed jets are
//! computed by plain calculus (parametric differentiation, implicit
//! differentiation, exact rational arithmetic throughout), and the engine's
//! symbolic formulas are evaluated at the same data and compared for exact
//! equality. This module deliberately never imports the stored reference
//! formulas — it knows nothing about what the answers "should" look like
//! symbolically, so agreement is evidence, not circularity.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{symbol, ExprError, MapComponent, Polynomial, RationalExpr, SymbolId};
use crate::jets::{self, CoefficientTable, JetError, Prolongation, PHI_ORDERS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("case sampling exhausted its resample budget")]
    ResampleBudget,
    #[error("degenerate case: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Attempts allowed when sampling a case that must pass the
/// non-degeneracy guards.
const RESAMPLE_BUDGET: u32 = 100;

fn xt_sym() -> SymbolId {
    symbol::var("xt")
}

fn yt_sym() -> SymbolId {
    symbol::var("yt")
}

/// A concrete inverse map `(x, y) = (chi(x̃, ỹ), psi(x̃, ỹ))` with a base
/// point in the transformed plane.
#[derive(Debug, Clone)]
pub struct ConcreteMap {
    pub chi: Polynomial,
    pub psi: Polynomial,
    pub base: (BigRational, BigRational),
}

impl ConcreteMap {
    pub fn identity() -> Self {
        ConcreteMap {
            chi: Polynomial::var(xt_sym()),
            psi: Polynomial::var(yt_sym()),
            base: (BigRational::zero(), BigRational::zero()),
        }
    }

    /// The coordinate swap `x = ỹ, y = x̃`.
    pub fn swap() -> Self {
        ConcreteMap {
            chi: Polynomial::var(yt_sym()),
            psi: Polynomial::var(xt_sym()),
            base: (BigRational::one(), BigRational::one()),
        }
    }

    pub fn with_base(mut self, x: BigRational, y: BigRational) -> Self {
        self.base = (x, y);
        self
    }

    fn component(&self, comp: MapComponent) -> &Polynomial {
        match comp {
            MapComponent::X => &self.chi,
            MapComponent::Y => &self.psi,
            _ => unreachable!("concrete maps have only inverse components"),
        }
    }

    /// `∂^{dx+dy} component / ∂x̃^dx ∂ỹ^dy` as a polynomial in `(x̃, ỹ)`.
    pub fn partial_poly(&self, comp: MapComponent, dx: u8, dy: u8) -> Polynomial {
        let mut p = self.component(comp).clone();
        for _ in 0..dx {
            p = p.partial(xt_sym());
        }
        for _ in 0..dy {
            p = p.partial(yt_sym());
        }
        p
    }

    /// Value of `∂^{dx+dy} component / ∂x̃^dx ∂ỹ^dy` at the base point.
    pub fn partial_value(
        &self,
        comp: MapComponent,
        dx: u8,
        dy: u8,
    ) -> Result<BigRational, ExprError> {
        let mut bind = HashMap::new();
        bind.insert(xt_sym(), self.base.0.clone());
        bind.insert(yt_sym(), self.base.1.clone());
        RationalExpr::from(self.partial_poly(comp, dx, dy)).eval(&bind)
    }

    /// Values of all eighteen inverse-map derivative symbols at the base.
    pub fn phi_bindings(&self) -> Result<HashMap<SymbolId, BigRational>, ExprError> {
        let mut out = HashMap::new();
        for comp in [MapComponent::X, MapComponent::Y] {
            for (dx, dy) in PHI_ORDERS {
                out.insert(jets::phi(comp, dx, dy), self.partial_value(comp, dx, dy)?);
            }
        }
        Ok(out)
    }

    /// All eighteen inverse-map derivative symbols bound to their polynomial
    /// partials — for specializing a general formula to this map while
    /// keeping full `(x̃, ỹ)` dependence.
    pub fn phi_poly_bindings(&self) -> HashMap<SymbolId, RationalExpr> {
        let mut out = HashMap::new();
        for comp in [MapComponent::X, MapComponent::Y] {
            for (dx, dy) in PHI_ORDERS {
                out.insert(
                    jets::phi(comp, dx, dy),
                    RationalExpr::from(self.partial_poly(comp, dx, dy)),
                );
            }
        }
        out
    }

    /// The single map equivalent to applying `self` first, then `next`.
    /// Components are pullbacks, so they compose contravariantly: the
    /// composite's components are `self`'s evaluated on `next`'s.
    pub fn then(&self, next: &ConcreteMap) -> Result<ConcreteMap, ExprError> {
        let mut b = HashMap::new();
        b.insert(xt_sym(), RationalExpr::from(next.chi.clone()));
        b.insert(yt_sym(), RationalExpr::from(next.psi.clone()));
        let chi = RationalExpr::from(self.chi.clone()).substitute(&b)?;
        let psi = RationalExpr::from(self.psi.clone()).substitute(&b)?;
        Ok(ConcreteMap {
            chi: chi.num().clone(),
            psi: psi.num().clone(),
            base: next.base.clone(),
        })
    }

    /// Jacobian determinant value at the base point.
    pub fn det_value(&self) -> Result<BigRational, ExprError> {
        Ok(self.partial_value(MapComponent::X, 1, 0)? * self.partial_value(MapComponent::Y, 0, 1)?
            - self.partial_value(MapComponent::X, 0, 1)?
                * self.partial_value(MapComponent::Y, 1, 0)?)
    }
}

/// A concrete curve `ỹ = c(x̃)` in the transformed plane.
#[derive(Debug, Clone)]
pub struct ConcreteCurve {
    pub poly: Polynomial,
}

impl ConcreteCurve {
    pub fn new(poly: Polynomial) -> Self {
        ConcreteCurve { poly }
    }

    /// `c^{(k)}(x̃0)` for k = 0..=order.
    pub fn jet_values(
        &self,
        at: &BigRational,
        order: u8,
    ) -> Result<Vec<BigRational>, ExprError> {
        let mut out = Vec::with_capacity(order as usize + 1);
        let mut p = self.poly.clone();
        let mut bind = HashMap::new();
        bind.insert(xt_sym(), at.clone());
        for _ in 0..=order {
            out.push(RationalExpr::from(p.clone()).eval(&bind)?);
            p = p.partial(xt_sym());
        }
        Ok(out)
    }
}

/// First three derivatives of y with respect to x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetValues {
    pub d1: BigRational,
    pub d2: BigRational,
    pub d3: BigRational,
}

/// Ground truth by parametric differentiation: push the curve through the
/// map to the plain plane as `s ↦ (chi(s, c(s)), psi(s, c(s)))` and compute
/// dy/dx, d²y/dx², d³y/dx³ at `s = x̃0` by plain univariate calculus.
///
/// Each derivative is carried as `numerator / ẋ^k` without any reduction:
/// `d/dx (n/ẋ^k) = (n'ẋ - k·n·ẋ')/ẋ^(k+2)`, and the guard `ẋ(x̃0) ≠ 0`
/// makes every denominator evaluable.
pub fn parametric_jets(map: &ConcreteMap, curve: &ConcreteCurve) -> Result<JetValues, OracleError> {
    let s = xt_sym();
    let mut compose = HashMap::new();
    compose.insert(yt_sym(), RationalExpr::from(curve.poly.clone()));
    let xs = RationalExpr::from(map.chi.clone()).substitute(&compose)?;
    let ys = RationalExpr::from(map.psi.clone()).substitute(&compose)?;
    debug_assert!(xs.is_polynomial() && ys.is_polynomial());

    let xd = xs.num().partial(s);
    let yd = ys.num().partial(s);
    let mut at = HashMap::new();
    at.insert(s, map.base.0.clone());
    let xd_at = RationalExpr::from(xd.clone()).eval(&at)?;
    if xd_at.is_zero() {
        return Err(OracleError::Degenerate(
            "image curve is vertical at the base point".into(),
        ));
    }

    // n1/ẋ, n2/ẋ^3, n3/ẋ^5.
    let n1 = yd;
    let n2 = &(&n1.partial(s) * &xd) - &(&n1 * &xd.partial(s));
    let n3 = &(&n2.partial(s) * &xd) - &(&n2.scale(&BigRational::from_integer(3.into())) * &xd.partial(s));

    let value = |n: &Polynomial, k: u32| -> Result<BigRational, OracleError> {
        let num = RationalExpr::from(n.clone()).eval(&at)?;
        let mut den = BigRational::one();
        for _ in 0..k {
            den *= &xd_at;
        }
        Ok(num / den)
    };
    Ok(JetValues {
        d1: value(&n1, 1)?,
        d2: value(&n2, 3)?,
        d3: value(&n3, 5)?,
    })
}

/// Full numeric bindings for a case: the eighteen map-derivative values plus
/// the curve jets `yt1..yt3` at the base.
pub fn case_bindings(
    map: &ConcreteMap,
    curve: &ConcreteCurve,
) -> Result<HashMap<SymbolId, BigRational>, OracleError> {
    let mut bind = map.phi_bindings()?;
    let jets_c = curve.jet_values(&map.base.0, 3)?;
    for k in 1..=3u8 {
        bind.insert(jets::t(k), jets_c[k as usize].clone());
    }
    Ok(bind)
}

#[derive(Debug, Clone)]
pub struct ProlongationCheck {
    pub expected: JetValues,
    pub derived: JetValues,
}

impl ProlongationCheck {
    pub fn matches(&self) -> bool {
        self.expected == self.derived
    }
}

/// Evaluate a symbolic prolongation at a concrete case and compare with the
/// parametric ground truth.
pub fn check_prolongation_at(
    p: &Prolongation,
    map: &ConcreteMap,
    curve: &ConcreteCurve,
) -> Result<ProlongationCheck, OracleError> {
    let bind = case_bindings(map, curve)?;
    let derived = JetValues {
        d1: p.yp.eval(&bind)?,
        d2: p.ypp.eval(&bind)?,
        d3: p.yppp.eval(&bind)?,
    };
    let expected = parametric_jets(map, curve)?;
    Ok(ProlongationCheck { expected, derived })
}

#[derive(Debug, Clone)]
pub struct TableCheck {
    pub expected_d3: BigRational,
    pub table_d3: BigRational,
}

impl TableCheck {
    pub fn matches(&self) -> bool {
        self.expected_d3 == self.table_d3
    }
}

/// Evaluate a coefficient table's reconstruction at a concrete case and
/// compare its third-derivative prediction with the parametric ground truth.
pub fn check_table_at(
    table: &CoefficientTable,
    map: &ConcreteMap,
    curve: &ConcreteCurve,
) -> Result<TableCheck, OracleError> {
    let bind = case_bindings(map, curve)?;
    let table_d3 = table.reconstruct().eval(&bind)?;
    let expected = parametric_jets(map, curve)?;
    Ok(TableCheck {
        expected_d3: expected.d3,
        table_d3,
    })
}

/// Check the transformed image of `y''' = 0` on one concrete case: take a
/// parabola `y = y0 + c1(x - x0) + c2(x - x0)^2` through the image of the
/// base point, pull it back through the map by implicit differentiation,
/// and test that the transformed-curve jets satisfy `yt3 = rhs`.
///
/// `rhs` must be expressed in the inverse-map derivative symbols and
/// `yt1, yt2` only.
pub fn check_zero_rhs_at(
    rhs: &RationalExpr,
    map: &ConcreteMap,
    parabola: (&BigRational, &BigRational),
) -> Result<bool, OracleError> {
    let (c1, c2) = parabola;
    let ju = ImplicitJets::solve(map, c1, c2)?;
    let mut bind = map.phi_bindings()?;
    bind.insert(jets::t(1), ju.d1.clone());
    bind.insert(jets::t(2), ju.d2.clone());
    let predicted = rhs.eval(&bind)?;
    Ok(predicted == ju.d3)
}

/// Jets of the transformed curve obtained by implicitly differentiating
/// `chi(u, v) = t, psi(u, v) = q(t)` at the base point.
struct ImplicitJets {
    d1: BigRational,
    d2: BigRational,
    d3: BigRational,
}

impl ImplicitJets {
    fn solve(
        map: &ConcreteMap,
        c1: &BigRational,
        c2: &BigRational,
    ) -> Result<Self, OracleError> {
        let v = |comp, dx, dy| map.partial_value(comp, dx, dy);
        use MapComponent::{X as CX, Y as CY};

        // Jacobian at the base.
        let xu = v(CX, 1, 0)?;
        let xv = v(CX, 0, 1)?;
        let yu = v(CY, 1, 0)?;
        let yv = v(CY, 0, 1)?;
        let det = &xu * &yv - &xv * &yu;
        if det.is_zero() {
            return Err(OracleError::Degenerate("singular Jacobian at base".into()));
        }
        let solve = |b1: &BigRational, b2: &BigRational| {
            (
                (b1 * &yv - b2 * &xv) / &det,
                (&xu * b2 - &yu * b1) / &det,
            )
        };

        // q(t) = y0 + c1(t - t0) + c2(t - t0)^2: q' = c1, q'' = 2c2, q''' = 0.
        let one = BigRational::one();
        let two = BigRational::from_integer(2.into());
        let three = BigRational::from_integer(3.into());
        let qp = c1.clone();
        let qpp = &two * c2;

        // First order: S (u̇, v̇) = (1, q').
        let (ud, vd) = solve(&one, &qp);
        if ud.is_zero() {
            return Err(OracleError::Degenerate(
                "transformed curve is vertical at the base point".into(),
            ));
        }

        // Second order: S (ü, v̈) = (-Q_x, q'' - Q_y) with
        // Q_f = f_xx u̇² + 2 f_xy u̇ v̇ + f_yy v̇².
        let quad = |comp| -> Result<BigRational, OracleError> {
            Ok(&(&v(comp, 2, 0)? * &ud) * &ud
                + &(&(&two * &v(comp, 1, 1)?) * &ud) * &vd
                + &(&v(comp, 0, 2)? * &vd) * &vd)
        };
        let qx = quad(CX)?;
        let qy = quad(CY)?;
        let (udd, vdd) = solve(&-&qx, &(&qpp - &qy));

        // Third order: S (u⃛, v⃛) = (-R_x, q''' - R_y) with
        // R_f = 3(f_xx u̇ + f_xy v̇) ü + 3(f_xy u̇ + f_yy v̇) v̈
        //       + f_xxx u̇³ + 3 f_xxy u̇² v̇ + 3 f_xyy u̇ v̇² + f_yyy v̇³.
        let cubic = |comp| -> Result<BigRational, OracleError> {
            let a = &(&v(comp, 2, 0)? * &ud + &(&v(comp, 1, 1)? * &vd)) * &udd;
            let b = &(&v(comp, 1, 1)? * &ud + &(&v(comp, 0, 2)? * &vd)) * &vdd;
            let c = &(&v(comp, 3, 0)? * &ud) * &(&ud * &ud)
                + &(&(&three * &v(comp, 2, 1)?) * &(&ud * &ud)) * &vd
                + &(&(&three * &v(comp, 1, 2)?) * &ud) * &(&vd * &vd)
                + &(&v(comp, 0, 3)? * &vd) * &(&vd * &vd);
            Ok(&(&three * &(a + b)) + &c)
        };
        let rx = cubic(CX)?;
        let ry = cubic(CY)?;
        let (uddd, vddd) = solve(&-&rx, &-&ry);

        // Graph jets of v as a function of u along (u(t), v(t)).
        let d1 = &vd / &ud;
        let d2 = (&vdd * &ud - &vd * &udd) / (&ud * &(&ud * &ud));
        let ud2 = &ud * &ud;
        let ud5 = &ud2 * &(&ud2 * &ud);
        let d3 = (&(&vddd * &ud2) - &(&(&vd * &uddd) * &ud) - &(&three * &(&(&vdd * &udd) * &ud))
            + &(&three * &(&vd * &(&udd * &udd))))
            / ud5;
        Ok(ImplicitJets { d1, d2, d3 })
    }
}

// ---------------------------------------------------------------------------
// Seeded case sampling
// ---------------------------------------------------------------------------

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn small_q(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::from_integer(rng.gen_range(-9i64..=9).into())
}

/// Random polynomial in the given variables with total degree ≤ `max_deg`
/// and integer coefficients in [-9, 9].
fn random_poly(rng: &mut ChaCha8Rng, vars: &[SymbolId], max_deg: u32) -> Polynomial {
    let mut terms = Vec::new();
    match vars {
        [s] => {
            for e in 0..=max_deg {
                let c = small_q(rng);
                if !c.is_zero() {
                    terms.push((crate::expr::Monomial::from_pairs(&[(*s, e)]), c));
                }
            }
        }
        [s1, s2] => {
            for e1 in 0..=max_deg {
                for e2 in 0..=(max_deg - e1) {
                    let c = small_q(rng);
                    if !c.is_zero() {
                        terms.push((
                            crate::expr::Monomial::from_pairs(&[(*s1, e1), (*s2, e2)]),
                            c,
                        ));
                    }
                }
            }
        }
        _ => unreachable!("samplers use one or two variables"),
    }
    Polynomial::from_terms(terms)
}

fn random_map(rng: &mut ChaCha8Rng) -> ConcreteMap {
    let vars = [xt_sym(), yt_sym()];
    ConcreteMap {
        chi: random_poly(rng, &vars, 3),
        psi: random_poly(rng, &vars, 3),
        base: (
            BigRational::from_integer(rng.gen_range(-3i64..=3).into()),
            BigRational::from_integer(rng.gen_range(-3i64..=3).into()),
        ),
    }
}

/// Sample a map/curve case for the given stream that passes the guards:
/// invertible Jacobian at the base and a non-vertical image curve. The base
/// point is anchored onto the curve, since the map-derivative values and the
/// curve jets must be taken at the same point of the curve.
pub fn sample_case(seed: u64, index: u64) -> Result<(ConcreteMap, ConcreteCurve), OracleError> {
    let mut rng = rng_for(seed, index);
    for _ in 0..RESAMPLE_BUDGET {
        let mut map = random_map(&mut rng);
        let curve = ConcreteCurve::new(random_poly(&mut rng, &[xt_sym()], 5));
        map.base.1 = curve.jet_values(&map.base.0, 0)?[0].clone();
        if map.det_value()?.is_zero() {
            continue;
        }
        if case_guards_pass(&map, &curve)? {
            return Ok((map, curve));
        }
    }
    Err(OracleError::ResampleBudget)
}

fn case_guards_pass(map: &ConcreteMap, curve: &ConcreteCurve) -> Result<bool, OracleError> {
    let jets_c = curve.jet_values(&map.base.0, 1)?;
    let w_value = map.partial_value(MapComponent::X, 1, 0)?
        + map.partial_value(MapComponent::X, 0, 1)? * jets_c[1].clone();
    Ok(!w_value.is_zero())
}

/// Sample a map and parabola for a transformed `y''' = 0` case: invertible
/// Jacobian and a non-vertical transformed curve.
pub fn sample_zero_rhs_case(
    seed: u64,
    index: u64,
) -> Result<(ConcreteMap, BigRational, BigRational), OracleError> {
    let mut rng = rng_for(seed, index);
    for _ in 0..RESAMPLE_BUDGET {
        let map = random_map(&mut rng);
        let c1 = small_q(&mut rng);
        let c2 = small_q(&mut rng);
        let det = map.det_value()?;
        if det.is_zero() {
            continue;
        }
        // u̇ = (yv - xv*c1)/det must not vanish.
        let ud_num = map.partial_value(MapComponent::Y, 0, 1)?
            - map.partial_value(MapComponent::X, 0, 1)? * c1.clone();
        if ud_num.is_zero() {
            continue;
        }
        return Ok((map, c1, c2));
    }
    Err(OracleError::ResampleBudget)
}

/// Outcome of a batch of seeded cases: which stream indices disagreed.
#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub cases: u64,
    pub failures: Vec<u64>,
}

impl BatchOutcome {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Run `cases` seeded prolongation checks.
pub fn prolongation_batch(
    p: &Prolongation,
    seed: u64,
    cases: u64,
) -> Result<BatchOutcome, OracleError> {
    let mut failures = Vec::new();
    for index in 0..cases {
        let (map, curve) = sample_case(seed, index)?;
        if !check_prolongation_at(p, &map, &curve)?.matches() {
            failures.push(index);
        }
    }
    Ok(BatchOutcome { cases, failures })
}

/// Run `cases` seeded coefficient-table checks.
pub fn table_batch(
    table: &CoefficientTable,
    seed: u64,
    cases: u64,
) -> Result<BatchOutcome, OracleError> {
    let mut failures = Vec::new();
    for index in 0..cases {
        let (map, curve) = sample_case(seed, index)?;
        if !check_table_at(table, &map, &curve)?.matches() {
            failures.push(index);
        }
    }
    Ok(BatchOutcome { cases, failures })
}

/// Run `cases` seeded transformed `y''' = 0` checks against a caller-supplied
/// right-hand side.
pub fn zero_rhs_batch(
    rhs: &RationalExpr,
    seed: u64,
    cases: u64,
) -> Result<BatchOutcome, OracleError> {
    let mut failures = Vec::new();
    for index in 0..cases {
        let (map, c1, c2) = sample_zero_rhs_case(seed, index)?;
        if !check_zero_rhs_at(rhs, &map, (&c1, &c2))? {
            failures.push(index);
        }
    }
    Ok(BatchOutcome { cases, failures })
}

/// A copy of `table` with one slot polynomial perturbed — for checking that
/// numeric validation actually detects wrong coefficients.
pub fn corrupt_slot(table: &CoefficientTable, index: usize) -> CoefficientTable {
    let mut slots = table.slots().clone();
    slots[index] = &slots[index] + &Polynomial::one();
    CoefficientTable::from_slots(slots)
}
