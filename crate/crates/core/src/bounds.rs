//! Lower bounds for complete binary guests assembled from optimal balanced
//! partitions, and the ratio of the approximation against them.

use num_rational::Ratio;

use crate::approx::{closed_form_coefficients, closed_form_objective};
use crate::error::{DaptError, Result};
use crate::partition::optimal_value;

/// Largest guest height the bound tables support.
pub const MAX_BOUND_HEIGHT: u32 = 60;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBoundTable {
    pub h_g: u32,
    /// `s_lower[i-1]` bounds the number of edges of length at least `2i`.
    pub s_lower: Vec<u64>,
}

impl LowerBoundTable {
    pub fn total(&self) -> u64 {
        2 * self.s_lower.iter().sum::<u64>()
    }
}

fn check_height(h_g: u32) -> Result<()> {
    if h_g == 0 || h_g > MAX_BOUND_HEIGHT {
        return Err(DaptError::InvalidParameter(format!(
            "guest height must be in 1..={MAX_BOUND_HEIGHT}, got {h_g}"
        )));
    }
    Ok(())
}

pub fn lower_bound_table(h_g: u32) -> Result<LowerBoundTable> {
    check_height(h_g)?;
    let mut s_lower = vec![(2u64 << h_g) - 2];
    for i in 2..=h_g + 1 {
        s_lower.push(optimal_value(h_g, h_g + 2 - i)?);
    }
    Ok(LowerBoundTable { h_g, s_lower })
}

pub fn dapt_lower_bound(h_g: u32) -> Result<u64> {
    Ok(lower_bound_table(h_g)?.total())
}

/// Asymptotic ratio function; increasing from `h_g = 4` with limit 203/200.
pub fn approximation_ratio(h_g: u32) -> f64 {
    let h = f64::from(h_g);
    let p = h.exp2();
    let num = 29.0 / 3.0 * p - 4.0 * h - 26.0 / 3.0;
    let den = 200.0 / 21.0 * p - 4.0 * h + 2.0 * std::f64::consts::SQRT_2 / 7.0 * (h / 2.0).exp2() - 28.0 / 3.0;
    num / den
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioCertificate {
    pub h_g: u32,
    pub upper: u64,
    pub lower: u64,
    /// Sum over `i` of the gaps between the algorithm's `s_i` and `s_i^L`.
    pub gap: u64,
}

impl RatioCertificate {
    pub fn empirical_ratio(&self) -> Ratio<u64> {
        Ratio::new(self.upper, self.lower)
    }

    pub fn within_guarantee(&self) -> bool {
        self.empirical_ratio() <= Ratio::new(203, 200)
    }
}

pub fn ratio_certificate(h_g: u32) -> Result<RatioCertificate> {
    let table = lower_bound_table(h_g)?;
    let tails = closed_form_coefficients(h_g)?;
    let mut gap = 0;
    for (i, (&s, &sl)) in tails.tails().iter().zip(&table.s_lower).enumerate() {
        if s < sl {
            return Err(DaptError::Internal(format!("s_{} = {s} falls below its bound {sl}", i + 1)));
        }
        gap += s - sl;
    }
    let upper = closed_form_objective(h_g)?;
    let lower = table.total();
    if upper - lower != 2 * gap {
        return Err(DaptError::Internal("gap does not reconcile with the objective values".into()));
    }
    Ok(RatioCertificate { h_g, upper, lower, gap })
}

/// Per-level comparison of the algorithm's profile with the bound, highest level first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumsTable {
    pub h_g: u32,
    pub a: Vec<u64>,
    pub s: Vec<u64>,
    pub s_lower: Vec<u64>,
}

impl SumsTable {
    pub fn new(h_g: u32) -> Result<Self> {
        let profile = closed_form_coefficients(h_g)?;
        let bound = lower_bound_table(h_g)?;
        Ok(Self { h_g, a: profile.counts().to_vec(), s: profile.tails().to_vec(), s_lower: bound.s_lower })
    }

    fn rows(&self) -> Vec<(&'static str, Vec<String>)> {
        let rev = |v: &[u64]| v.iter().rev().map(ToString::to_string).collect::<Vec<_>>();
        let h = self.a.len();
        vec![
            ("i", (1..=h).rev().map(|i| i.to_string()).collect()),
            ("a_i(phi_A)", rev(&self.a)),
            ("s_i(phi_A)", rev(&self.s)),
            ("s_i^L", rev(&self.s_lower)),
        ]
    }

    pub fn to_text(&self) -> String {
        crate::table::aligned_rows(&self.rows())
    }

    /// CSV rows `h_G,i,a_i,s_i,s_i_L`, highest `i` first, without a header.
    pub fn to_csv_rows(&self) -> String {
        let mut out = String::new();
        for i in (1..=self.a.len()).rev() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.h_g,
                i,
                self.a[i - 1],
                self.s[i - 1],
                self.s_lower[i - 1]
            ));
        }
        out
    }
}
