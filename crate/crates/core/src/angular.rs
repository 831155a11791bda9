//! Exact angular-momentum algebra and the chain structure of σ± transitions.
//!
//! Half-integers are stored doubled. Clebsch-Gordan coefficients follow the
//! Condon-Shortley phase convention and are kept as signed square roots of
//! rationals, so algebraic identities between them hold exactly.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer or half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(value: i32) -> Self {
        HalfInt { twice: 2 * value }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub fn abs(self) -> Self {
        HalfInt {
            twice: self.twice.abs(),
        }
    }

    /// Magnetic sublevels `-F, -F+1, ..., F` of a level with angular momentum `self`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let t = self.twice;
        (-t..=t).step_by(2).map(HalfInt::from_twice)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice + rhs.twice,
        }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice - rhs.twice,
        }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("`{s}` is not an integer or half-integer"));
        match s.split_once('/') {
            None => s.parse::<i32>().map(HalfInt::from_int).map_err(|_| bad()),
            Some((num, den)) => {
                let num: i32 = num.trim().parse().map_err(|_| bad())?;
                match den.trim() {
                    "2" => Ok(HalfInt::from_twice(num)),
                    "1" => Ok(HalfInt::from_int(num)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

impl From<HalfInt> for String {
    fn from(h: HalfInt) -> String {
        h.to_string()
    }
}

impl TryFrom<String> for HalfInt {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Circular polarization of a photon mode, `s = ±1` along the wavevector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::Plus, Polarization::Minus];

    pub fn sign(self) -> i32 {
        match self {
            Polarization::Plus => 1,
            Polarization::Minus => -1,
        }
    }

    pub fn opposite(self) -> Polarization {
        match self {
            Polarization::Plus => Polarization::Minus,
            Polarization::Minus => Polarization::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Polarization::Plus => '+',
            Polarization::Minus => '-',
        }
    }
}

impl FromStr for Polarization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Ok(Polarization::Plus),
            "-" | "-1" | "minus" => Ok(Polarization::Minus),
            other => Err(Error::Parse(format!(
                "`{other}` is not a polarization (+ or -)"
            ))),
        }
    }
}

/// A real number of the form `sign * sqrt(square)` with `square` rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactCG {
    sign: i8,
    square: BigRational,
}

impl ExactCG {
    pub fn zero() -> Self {
        ExactCG {
            sign: 0,
            square: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        ExactCG {
            sign: 1,
            square: BigRational::one(),
        }
    }

    /// Builds `sign * sqrt(square)`. A zero square forces a zero sign.
    pub fn from_signed_square(sign: i8, square: BigRational) -> Self {
        assert!(
            !square.is_negative(),
            "square of a real number cannot be negative"
        );
        if square.is_zero() || sign == 0 {
            return ExactCG::zero();
        }
        ExactCG {
            sign: sign.signum(),
            square,
        }
    }

    pub fn from_ratio(sign: i8, numer: i64, denom: i64) -> Self {
        Self::from_signed_square(
            sign,
            BigRational::new(BigInt::from(numer), BigInt::from(denom)),
        )
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn square(&self) -> &BigRational {
        &self.square
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn abs(&self) -> ExactCG {
        ExactCG {
            sign: self.sign.abs(),
            square: self.square.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let sq = self.square.to_f64().unwrap_or(f64::NAN);
        f64::from(self.sign) * sq.sqrt()
    }
}

impl Mul for &ExactCG {
    type Output = ExactCG;
    fn mul(self, rhs: &ExactCG) -> ExactCG {
        ExactCG::from_signed_square(self.sign * rhs.sign, &self.square * &rhs.square)
    }
}

impl Mul for ExactCG {
    type Output = ExactCG;
    fn mul(self, rhs: ExactCG) -> ExactCG {
        &self * &rhs
    }
}

impl Neg for ExactCG {
    type Output = ExactCG;
    fn neg(self) -> ExactCG {
        ExactCG {
            sign: -self.sign,
            square: self.square,
        }
    }
}

impl fmt::Display for ExactCG {
    /// Surd form, e.g. `-sqrt(1/3)`, `1`, `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            return write!(f, "0");
        }
        let sign = if self.sign < 0 { "-" } else { "" };
        if self.square.is_one() {
            write!(f, "{sign}1")
        } else {
            write!(f, "{sign}sqrt({})", self.square)
        }
    }
}

impl Serialize for ExactCG {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("ExactCG", 3)?;
        st.serialize_field("surd", &self.to_string())?;
        st.serialize_field("square", &self.square.to_string())?;
        st.serialize_field("value", &self.to_f64())?;
        st.end()
    }
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn check_projection(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice() < 0 {
        return Err(Error::InvalidAngularMomentum(format!(
            "negative angular momentum {j}"
        )));
    }
    if (j.twice() - m.twice()) % 2 != 0 {
        return Err(Error::InvalidAngularMomentum(format!(
            "parity mismatch between j={j} and m={m}"
        )));
    }
    if m.twice().abs() > j.twice() {
        return Err(Error::InvalidAngularMomentum(format!(
            "|m|={} exceeds j={j}",
            m.abs()
        )));
    }
    Ok(())
}

/// `<j1 m1; j2 m2 | J M>` by the Racah closed-form sum, in exact arithmetic.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<ExactCG> {
    check_projection(j1, m1)?;
    check_projection(j2, m2)?;
    check_projection(j, m)?;
    let (tj1, tj2, tj) = (j1.twice(), j2.twice(), j.twice());
    if tj < (tj1 - tj2).abs() || tj > tj1 + tj2 || (tj1 + tj2 + tj) % 2 != 0 {
        return Err(Error::InvalidAngularMomentum(format!(
            "({j1}, {j2}, {j}) violates the triangle rule"
        )));
    }
    if m.twice() != m1.twice() + m2.twice() {
        return Ok(ExactCG::zero());
    }
    let (tm1, tm2, tm) = (m1.twice(), m2.twice(), m.twice());
    let half = |x: i32| x / 2;

    let numer = BigInt::from(tj + 1)
        * factorial(half(tj1 + tj2 - tj))
        * factorial(half(tj1 - tj2 + tj))
        * factorial(half(-tj1 + tj2 + tj))
        * factorial(half(tj + tm))
        * factorial(half(tj - tm))
        * factorial(half(tj1 - tm1))
        * factorial(half(tj1 + tm1))
        * factorial(half(tj2 - tm2))
        * factorial(half(tj2 + tm2));
    let prefactor = BigRational::new(numer, factorial(half(tj1 + tj2 + tj) + 1));

    let k_min = 0.max(half(tj2 - tj - tm1)).max(half(tj1 + tm2 - tj));
    let k_max = half(tj1 + tj2 - tj)
        .min(half(tj1 - tm1))
        .min(half(tj2 + tm2));
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(half(tj1 + tj2 - tj) - k)
            * factorial(half(tj1 - tm1) - k)
            * factorial(half(tj2 + tm2) - k)
            * factorial(half(tj - tj2 + tm1) + k)
            * factorial(half(tj - tj1 - tm2) + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let sign = if sum.is_zero() {
        0
    } else if sum.is_positive() {
        1
    } else {
        -1
    };
    Ok(ExactCG::from_signed_square(sign, prefactor * &sum * &sum))
}

/// Dipole coefficient `C^{F_e mu_e}_{F_g mu_g, 1 s}` for a σ± photon.
pub fn dipole_cg(
    fg: HalfInt,
    mu_g: HalfInt,
    fe: HalfInt,
    mu_e: HalfInt,
    q: i32,
) -> Result<ExactCG> {
    clebsch_gordan(
        fg,
        mu_g,
        HalfInt::from_int(1),
        HalfInt::from_int(q),
        fe,
        mu_e,
    )
}

/// A dipole-allowed pair of angular momenta `F_g -> F_e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub fg: HalfInt,
    pub fe: HalfInt,
}

impl Transition {
    pub fn new(fg: HalfInt, fe: HalfInt) -> Result<Self> {
        if fg.twice() < 0 || fe.twice() < 0 {
            return Err(Error::InvalidAngularMomentum(format!(
                "{fg}:{fe} has a negative momentum"
            )));
        }
        if (fg.twice() - fe.twice()) % 2 != 0 || (fg.twice() - fe.twice()).abs() > 2 {
            return Err(Error::InvalidAngularMomentum(format!(
                "{fg} -> {fe} is not dipole-allowed (|F_g - F_e| must be 0 or 1)"
            )));
        }
        if fg.twice() == 0 && fe.twice() == 0 {
            return Err(Error::InvalidAngularMomentum(
                "0 -> 0 is not dipole-allowed".into(),
            ));
        }
        Ok(Transition { fg, fe })
    }

    /// Every dipole-allowed transition with `2F_g, 2F_e <= max_twice`.
    pub fn all_up_to(max_twice: i32) -> Vec<Transition> {
        let mut out = Vec::new();
        for tg in 0..=max_twice {
            for te in 0..=max_twice {
                if let Ok(t) = Transition::new(HalfInt::from_twice(tg), HalfInt::from_twice(te)) {
                    out.push(t);
                }
            }
        }
        out
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.fg, self.fe)
    }
}

impl FromStr for Transition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (g, e) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("transition `{s}` must look like Fg:Fe")))?;
        let fg: HalfInt = g.parse()?;
        let fe: HalfInt = e.parse()?;
        Transition::new(fg, fe)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SiteRole {
    Ground,
    Excited,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub role: SiteRole,
    pub mu: HalfInt,
    pub label: u32,
}

/// One σ± link `G^{excited}_{ground}` of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coupling {
    pub ground: u32,
    pub excited: u32,
    pub polarization: Polarization,
    pub g: ExactCG,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChainKind {
    Lambda,
    NPlus,
    NMinus,
    V,
    IsolatedGround,
    IsolatedExcited,
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChainKind::Lambda => "Lambda",
            ChainKind::NPlus => "N+",
            ChainKind::NMinus => "N-",
            ChainKind::V => "V",
            ChainKind::IsolatedGround => "isolated-ground",
            ChainKind::IsolatedExcited => "isolated-excited",
        };
        f.write_str(s)
    }
}

/// A connected path of dipole-coupled Zeeman substates.
///
/// Sites are ordered by ascending `mu` and renumbered so that ground sites
/// carry the odd labels `1, 3, ..., 2L+1` and excited sites the even ones.
/// Chains that start on an excited site give it label 0 (N- and V kinds).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub transition: Transition,
    pub kind: ChainKind,
    /// Number of Λ-links in the maximal Λ-sub-chain.
    pub links: u32,
    pub sites: Vec<Site>,
    pub couplings: Vec<Coupling>,
}

impl Chain {
    pub fn ground_sites(&self) -> impl Iterator<Item = &Site> {
        self.sites.iter().filter(|s| s.role == SiteRole::Ground)
    }

    pub fn excited_sites(&self) -> impl Iterator<Item = &Site> {
        self.sites.iter().filter(|s| s.role == SiteRole::Excited)
    }

    pub fn site(&self, label: u32) -> Option<&Site> {
        self.sites.iter().find(|s| s.label == label)
    }

    pub fn ground_mu(&self, label: u32) -> Option<HalfInt> {
        self.site(label)
            .filter(|s| s.role == SiteRole::Ground)
            .map(|s| s.mu)
    }

    pub fn excited_mu(&self, label: u32) -> Option<HalfInt> {
        self.site(label)
            .filter(|s| s.role == SiteRole::Excited)
            .map(|s| s.mu)
    }

    pub fn contains_ground(&self, mu: HalfInt) -> bool {
        self.ground_sites().any(|s| s.mu == mu)
    }

    pub fn contains_excited(&self, mu: HalfInt) -> bool {
        self.excited_sites().any(|s| s.mu == mu)
    }

    /// `G^k_l`: the coefficient linking excited label `k` and ground label `l`.
    pub fn g(&self, excited: u32, ground: u32) -> Option<&ExactCG> {
        self.couplings
            .iter()
            .find(|c| c.excited == excited && c.ground == ground)
            .map(|c| &c.g)
    }

    /// Couplings of the maximal Λ-sub-chain (excited labels `2..=2L`).
    pub fn lambda_couplings(&self) -> impl Iterator<Item = &Coupling> {
        let top = 2 * self.links;
        self.couplings
            .iter()
            .filter(move |c| c.excited >= 2 && c.excited <= top)
    }

    /// True for chain kinds that contain at least one ground site.
    pub fn has_lambda_part(&self) -> bool {
        self.kind != ChainKind::IsolatedExcited
    }

    /// Same chain with every coupling replaced by `value`.
    pub fn with_uniform_couplings(&self, value: &ExactCG) -> Chain {
        let mut out = self.clone();
        for c in &mut out.couplings {
            c.g = value.clone();
        }
        out
    }

    /// Site list rendered as `g-2, e-1, g0, ...`.
    pub fn site_list(&self) -> String {
        self.sites
            .iter()
            .map(|s| {
                let r = if s.role == SiteRole::Ground { 'g' } else { 'e' };
                let sign = if s.mu.twice() > 0 { "+" } else { "" };
                format!("{r}{sign}{}", s.mu)
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Splits the σ± coupling graph of `transition` into chains.
///
/// Every ground and excited substate appears in exactly one chain. Edges with a
/// vanishing coefficient are dropped before the graph is split, so no chain
/// carries a zero coupling. Chains are sorted by their lowest `mu`, ground
/// before excited on ties.
pub fn decompose_chains(transition: Transition) -> Result<Vec<Chain>> {
    let Transition { fg, fe } = transition;
    let grounds: Vec<HalfInt> = fg.projections().collect();
    let exciteds: Vec<HalfInt> = fe.projections().collect();

    // Node ids: ground i -> i, excited i -> grounds.len() + i.
    let n = grounds.len() + exciteds.len();
    let mut adj: Vec<Vec<(usize, Polarization, ExactCG)>> = vec![Vec::new(); n];
    for (gi, &mu_g) in grounds.iter().enumerate() {
        for pol in Polarization::BOTH {
            let mu_e = mu_g + HalfInt::from_int(pol.sign());
            if mu_e.twice().abs() > fe.twice() {
                continue;
            }
            let g = dipole_cg(fg, mu_g, fe, mu_e, pol.sign())?;
            if g.is_zero() {
                continue;
            }
            let ei = grounds.len() + exciteds.iter().position(|&m| m == mu_e).expect("in range");
            adj[gi].push((ei, pol, g.clone()));
            adj[ei].push((gi, pol, g));
        }
    }

    let mut seen = vec![false; n];
    let mut chains = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut component = vec![start];
        seen[start] = true;
        let mut cursor = 0;
        while cursor < component.len() {
            let node = component[cursor];
            cursor += 1;
            for &(next, _, _) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    component.push(next);
                }
            }
        }
        let node_info = |id: usize| -> (SiteRole, HalfInt) {
            if id < grounds.len() {
                (SiteRole::Ground, grounds[id])
            } else {
                (SiteRole::Excited, exciteds[id - grounds.len()])
            }
        };
        component.sort_by_key(|&id| {
            let (role, mu) = node_info(id);
            (mu, role)
        });

        let first_label = if node_info(component[0]).0 == SiteRole::Excited {
            0
        } else {
            1
        };
        let mut sites = Vec::with_capacity(component.len());
        let mut label_of = vec![u32::MAX; n];
        for (offset, &id) in component.iter().enumerate() {
            let (role, mu) = node_info(id);
            let label = first_label + offset as u32;
            let expected = if label % 2 == 1 {
                SiteRole::Ground
            } else {
                SiteRole::Excited
            };
            debug_assert_eq!(role, expected, "chain sites must alternate ground/excited");
            label_of[id] = label;
            sites.push(Site { role, mu, label });
        }

        let mut couplings = Vec::new();
        for &id in &component {
            if id >= grounds.len() {
                continue;
            }
            for (next, pol, g) in &adj[id] {
                couplings.push(Coupling {
                    ground: label_of[id],
                    excited: label_of[*next],
                    polarization: *pol,
                    g: g.clone(),
                });
            }
        }
        couplings.sort_by_key(|c| (c.ground.min(c.excited), c.ground.max(c.excited)));

        let n_ground = sites.iter().filter(|s| s.role == SiteRole::Ground).count() as u32;
        let n_excited = sites.len() as u32 - n_ground;
        let (kind, links) = if n_excited == 0 {
            (ChainKind::IsolatedGround, 0)
        } else if n_ground == 0 {
            (ChainKind::IsolatedExcited, 0)
        } else if n_ground == n_excited + 1 {
            (ChainKind::Lambda, n_excited)
        } else if n_excited == n_ground + 1 {
            (ChainKind::V, n_ground - 1)
        } else if n_ground == n_excited {
            let kind = if first_label == 1 {
                ChainKind::NPlus
            } else {
                ChainKind::NMinus
            };
            (kind, n_ground - 1)
        } else {
            unreachable!("σ± chains are paths with alternating roles")
        };
        chains.push(Chain {
            transition,
            kind,
            links,
            sites,
            couplings,
        });
    }
    chains.sort_by_key(|c| (c.sites[0].mu, c.sites[0].role));
    Ok(chains)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> HalfInt {
        s.parse().unwrap()
    }

    fn t(s: &str) -> Transition {
        s.parse().unwrap()
    }

    #[test]
    fn halfint_parse_and_display() {
        assert_eq!(h("3/2").twice(), 3);
        assert_eq!(h("-1/2").twice(), -1);
        assert_eq!(h("2").twice(), 4);
        assert_eq!(h("4/2").twice(), 4);
        assert_eq!(h("-3/2").to_string(), "-3/2");
        assert_eq!(h("-1").to_string(), "-1");
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("x".parse::<HalfInt>().is_err());
    }

    #[test]
    fn cg_examples() {
        let one = h("1");
        let cg = clebsch_gordan(h("0"), h("0"), one, one, one, one).unwrap();
        assert_eq!(cg, ExactCG::one());

        let cg = clebsch_gordan(one, one, one, h("-1"), h("0"), h("0")).unwrap();
        assert_eq!(cg.sign(), 1);
        assert_eq!(cg, ExactCG::from_ratio(1, 1, 3));

        let cg = clebsch_gordan(one, one, one, one, h("2"), one).unwrap();
        assert_eq!(cg.sign(), 0);
    }

    #[test]
    fn cg_rejects_invalid_input() {
        let one = h("1");
        assert!(matches!(
            clebsch_gordan(one, h("1/2"), one, one, h("2"), h("2")),
            Err(Error::InvalidAngularMomentum(_))
        ));
        assert!(matches!(
            clebsch_gordan(one, one, one, h("0"), h("3"), one),
            Err(Error::InvalidAngularMomentum(_))
        ));
        assert!(clebsch_gordan(one, h("2"), one, h("0"), h("2"), h("2")).is_err());
    }

    #[test]
    fn transition_parsing() {
        assert!("1:3".parse::<Transition>().is_err());
        assert!("1/2:1".parse::<Transition>().is_err());
        assert_eq!(t("3/2:1/2").fe.twice(), 1);
    }

    #[test]
    fn two_to_one_gives_two_lambda_chains() {
        let chains = decompose_chains(t("2:1")).unwrap();
        assert_eq!(chains.len(), 2);
        assert!(chains.iter().all(|c| c.kind == ChainKind::Lambda));
        assert_eq!(chains[0].links, 2);
        assert_eq!(chains[0].site_list(), "g-2,e-1,g0,e+1,g+2");
        assert_eq!(chains[1].links, 1);
        assert_eq!(chains[1].site_list(), "g-1,e0,g+1");
    }

    #[test]
    fn three_halves_gives_n_chains() {
        let chains = decompose_chains(t("3/2:3/2")).unwrap();
        assert_eq!(chains.len(), 2);
        assert_eq!(chains[0].kind, ChainKind::NPlus);
        assert_eq!(chains[0].site_list(), "g-3/2,e-1/2,g+1/2,e+3/2");
        assert_eq!(chains[1].kind, ChainKind::NMinus);
        assert_eq!(chains[1].site_list(), "e-3/2,g-1/2,e+1/2,g+3/2");
        assert!(chains.iter().all(|c| c.links == 1));
        // N+ has its extra excited site on top, N- at label 0.
        assert_eq!(chains[0].excited_mu(4), Some(h("3/2")));
        assert_eq!(chains[1].excited_mu(0), Some(h("-3/2")));
    }

    #[test]
    fn one_to_two_gives_v_chains() {
        let chains = decompose_chains(t("1:2")).unwrap();
        assert_eq!(chains.len(), 2);
        assert!(chains.iter().all(|c| c.kind == ChainKind::V));
        assert_eq!(chains[0].links, 1);
        assert_eq!(chains[0].site_list(), "e-2,g-1,e0,g+1,e+2");
        assert_eq!(chains[1].links, 0);
        assert_eq!(chains[1].site_list(), "e-1,g0,e+1");
    }

    #[test]
    fn two_to_two_mixes_lambda_and_v() {
        let chains = decompose_chains(t("2:2")).unwrap();
        let kinds: Vec<_> = chains.iter().map(|c| (c.kind, c.links)).collect();
        assert_eq!(kinds, vec![(ChainKind::Lambda, 2), (ChainKind::V, 1)]);
    }

    #[test]
    fn unreachable_substates_are_isolated() {
        let chains = decompose_chains(t("1:0")).unwrap();
        let kinds: Vec<_> = chains.iter().map(|c| c.kind).collect();
        assert_eq!(kinds, vec![ChainKind::Lambda, ChainKind::IsolatedGround]);
        let chains = decompose_chains(t("0:1")).unwrap();
        let kinds: Vec<_> = chains.iter().map(|c| c.kind).collect();
        assert_eq!(kinds, vec![ChainKind::V, ChainKind::IsolatedExcited]);
    }

    #[test]
    fn lambda_labels_follow_renumbering() {
        let chain = &decompose_chains(t("2:1")).unwrap()[0];
        let labels: Vec<u32> = chain.sites.iter().map(|s| s.label).collect();
        assert_eq!(labels, vec![1, 2, 3, 4, 5]);
        assert_eq!(chain.lambda_couplings().count(), 4);
        let up = chain
            .couplings
            .iter()
            .find(|c| c.ground == 1 && c.excited == 2)
            .unwrap();
        assert_eq!(up.polarization, Polarization::Plus);
        let down = chain
            .couplings
            .iter()
            .find(|c| c.ground == 3 && c.excited == 2)
            .unwrap();
        assert_eq!(down.polarization, Polarization::Minus);
    }

    #[test]
    fn exact_cg_display() {
        assert_eq!(ExactCG::from_ratio(-1, 1, 3).to_string(), "-sqrt(1/3)");
        assert_eq!(ExactCG::one().to_string(), "1");
        assert_eq!(ExactCG::zero().to_string(), "0");
        let p = &ExactCG::from_ratio(-1, 1, 2) * &ExactCG::from_ratio(-1, 2, 3);
        assert_eq!(p, ExactCG::from_ratio(1, 1, 3));
    }
}
