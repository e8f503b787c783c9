//! Group comparison tests. One-sided tests use the alternative that the
//! second sample is larger; effect sizes are `mean(b) - mean(a)`.

use serde::{Deserialize, Serialize};

use super::special::{f_cdf, f_sf, normal_cdf, student_t_sf};
use super::AnalyticsError;

/// Pooled sample size at or below which Mann-Whitney uses the exact null.
pub const EXACT_MWU_MAX_N: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Anova,
    TTest,
    WelchTTest,
    MannWhitney,
    FVar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    /// Second group mean minus first; eta squared for ANOVA.
    pub effect_size: f64,
    /// Degrees of freedom of the reference distribution, if it has any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub df: Vec<f64>,
    /// Exact null distribution was used (Mann-Whitney only).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exact: bool,
    /// The statistic was undefined and replaced by its limit.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl TestResult {
    fn new(method: Method, statistic: f64, p_value: f64, effect_size: f64) -> Self {
        TestResult {
            method,
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            effect_size,
            df: Vec::new(),
            exact: false,
            degenerate: false,
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn check(sample: &[f64], need: usize) -> Result<(), AnalyticsError> {
    if sample.len() < need {
        return Err(AnalyticsError::TooFewObservations {
            need,
            got: sample.len(),
        });
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(AnalyticsError::NonFinite);
    }
    Ok(())
}

pub fn one_way_anova(groups: &[&[f64]]) -> Result<TestResult, AnalyticsError> {
    if groups.len() < 2 {
        return Err(AnalyticsError::TooFewGroups(groups.len()));
    }
    for g in groups {
        check(g, 2)?;
    }
    let k = groups.len() as f64;
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = mean(g);
        ssb += g.len() as f64 * (m - grand) * (m - grand);
        ssw += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    let (df1, df2) = (k - 1.0, n as f64 - k);
    let sst = ssb + ssw;
    let eta_sq = if sst > 0.0 { ssb / sst } else { 0.0 };
    let mut r = if ssw > 0.0 {
        let f = (ssb / df1) / (ssw / df2);
        TestResult::new(Method::Anova, f, f_sf(f, df1, df2), eta_sq)
    } else if ssb > 0.0 {
        let mut r = TestResult::new(Method::Anova, f64::INFINITY, 0.0, eta_sq);
        r.degenerate = true;
        r
    } else {
        let mut r = TestResult::new(Method::Anova, 0.0, 1.0, eta_sq);
        r.degenerate = true;
        r
    };
    r.df = vec![df1, df2];
    Ok(r)
}

/// Unpaired t-test of `mean(b) > mean(a)`. Pooled variance unless `welch`.
pub fn t_test_one_sided(a: &[f64], b: &[f64], welch: bool) -> Result<TestResult, AnalyticsError> {
    check(a, 2)?;
    check(b, 2)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (variance(a), variance(b));
    let effect = mean(b) - mean(a);
    let (se, df) = if welch {
        let (qa, qb) = (va / na, vb / nb);
        let se = (qa + qb).sqrt();
        let df = (qa + qb).powi(2) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
        (se, df)
    } else {
        let df = na + nb - 2.0;
        let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
        ((sp2 * (1.0 / na + 1.0 / nb)).sqrt(), df)
    };
    let method = if welch { Method::WelchTTest } else { Method::TTest };
    let mut r = if se > 0.0 {
        let t = effect / se;
        TestResult::new(method, t, student_t_sf(t, df), effect)
    } else {
        // Both samples constant.
        let (t, p) = match effect.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => (f64::INFINITY, 0.0),
            Some(std::cmp::Ordering::Less) => (f64::NEG_INFINITY, 1.0),
            _ => (0.0, 0.5),
        };
        let mut r = TestResult::new(method, t, p, effect);
        r.degenerate = true;
        r
    };
    r.df = vec![df];
    Ok(r)
}

/// Midranks of the pooled sample, `a` first.
fn pooled_ranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// Number of arrangements of `m` and `n` items for each value of
/// `U = #{(x, y) : x from the m-group ranks above y}`; index is U.
pub fn mann_whitney_null_counts(m: usize, n: usize) -> Vec<f64> {
    // table[i][j] holds the distribution for sizes (i, j)
    let max_u = m * n;
    let mut table: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n + 1]; m + 1];
    for i in 0..=m {
        for j in 0..=n {
            let mut dist = vec![0.0; i * j + 1];
            if i == 0 || j == 0 {
                dist[0] = 1.0;
            } else {
                // The largest value belongs to the first group (beats all j)
                // or to the second (beats nothing).
                for (u, c) in table[i - 1][j].iter().enumerate() {
                    dist[u + j] += c;
                }
                for (u, c) in table[i][j - 1].iter().enumerate() {
                    dist[u] += c;
                }
            }
            table[i][j] = dist;
        }
    }
    let out = std::mem::take(&mut table[m][n]);
    debug_assert_eq!(out.len(), max_u + 1);
    out
}

/// Mann-Whitney U with the alternative that `b` is stochastically greater.
/// The statistic is U for `a`; small values favour the alternative.
pub fn mann_whitney_u_one_sided(a: &[f64], b: &[f64]) -> Result<TestResult, AnalyticsError> {
    check(a, 1)?;
    check(b, 1)?;
    let (na, nb) = (a.len(), b.len());
    let (ranks, ties) = pooled_ranks(a, b);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;
    let effect = mean(b) - mean(a);
    let cross_ties = a.iter().any(|x| b.contains(x));

    if na + nb <= EXACT_MWU_MAX_N && !cross_ties {
        let counts = mann_whitney_null_counts(na, nb);
        let total: f64 = counts.iter().sum();
        // u is integral without cross-group ties
        let u_obs = u.round() as usize;
        let below: f64 = counts[..=u_obs].iter().sum();
        let mut r = TestResult::new(Method::MannWhitney, u, below / total, effect);
        r.exact = true;
        return Ok(r);
    }

    let n = (na + nb) as f64;
    let (fa, fb) = (na as f64, nb as f64);
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let sigma = (fa * fb / 12.0 * ((n + 1.0) - tie_term)).sqrt();
    let mu = fa * fb / 2.0;
    if sigma <= 0.0 || !sigma.is_finite() {
        let mut r = TestResult::new(Method::MannWhitney, u, 0.5, effect);
        r.degenerate = true;
        return Ok(r);
    }
    let z = (u - mu + 0.5) / sigma;
    Ok(TestResult::new(Method::MannWhitney, u, normal_cdf(z), effect))
}

/// Variance ratio `var(a) / var(b)` with a two-sided p-value.
pub fn f_test_equal_variance(a: &[f64], b: &[f64]) -> Result<TestResult, AnalyticsError> {
    check(a, 2)?;
    check(b, 2)?;
    let vb = variance(b);
    if vb <= 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    let f = variance(a) / vb;
    let (d1, d2) = (a.len() as f64 - 1.0, b.len() as f64 - 1.0);
    let p = 2.0 * f_cdf(f, d1, d2).min(f_sf(f, d1, d2));
    let mut r = TestResult::new(Method::FVar, f, p, mean(b) - mean(a));
    r.df = vec![d1, d2];
    Ok(r)
}

/// Pearson correlation; `None` when either sample is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn anova_fixtures() {
        let r = one_way_anova(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]).unwrap();
        assert!((r.statistic - 16.0).abs() < 1e-12);
        assert!((r.p_value - 0.025_094_573_304_390_855).abs() < 1e-12);
        assert_eq!(r.df, [2.0, 3.0]);

        let g = [1.0, 2.0, 3.0];
        let r = one_way_anova(&[&g, &g, &g]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-15);
        assert!(!r.degenerate);
    }

    #[test]
    fn anova_zero_within_variance() {
        let r = one_way_anova(&[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 0.0);
        let r = one_way_anova(&[&[2.0, 2.0], &[2.0, 2.0]]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
        assert!(one_way_anova(&[&[1.0], &[2.0, 3.0]]).is_err());
    }

    #[test]
    fn t_test_fixtures() {
        let r = t_test_one_sided(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], false).unwrap();
        assert!((r.statistic - 1.5f64.sqrt()).abs() < 1e-12);
        assert!((r.p_value - 0.143_932_067_363_345_4).abs() < 1e-10);
        assert_eq!(r.effect_size, 1.0);
        assert_eq!(r.df, [4.0]);

        let a = [3.0, 1.0, 4.0, 1.0, 5.0];
        let r = t_test_one_sided(&a, &a, false).unwrap();
        assert_eq!((r.statistic, r.p_value, r.effect_size), (0.0, 0.5, 0.0));
    }

    #[test]
    fn welch_matches_pooled_for_balanced_equal_variance() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 3.0, 4.0];
        let p = t_test_one_sided(&a, &b, false).unwrap();
        let w = t_test_one_sided(&a, &b, true).unwrap();
        assert!((p.statistic - w.statistic).abs() < 1e-12);
        assert!((w.df[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mann_whitney_fixtures() {
        let r = mann_whitney_u_one_sided(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.exact);
        assert!((r.p_value - 1.0 / 6.0).abs() < 1e-15);

        let r = mann_whitney_u_one_sided(&[5.0], &[5.0]).unwrap();
        assert_eq!(r.p_value, 0.5);
    }

    #[test]
    fn null_counts_sum_to_binomial() {
        let c = mann_whitney_null_counts(5, 7);
        assert_eq!(c.iter().sum::<f64>(), 792.0);
        // symmetric about mn/2
        for u in 0..c.len() {
            assert_eq!(c[u], c[c.len() - 1 - u]);
        }
    }

    #[test]
    fn f_test_fixtures() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(f_test_equal_variance(&a, &a).unwrap().statistic, 1.0);
        let r = f_test_equal_variance(&a, &[2.0, 4.0, 6.0]).unwrap();
        assert!((r.statistic - 0.25).abs() < 1e-15);
        let r = f_test_equal_variance(&[2.0, 4.0, 6.0], &a).unwrap();
        assert!((r.statistic - 4.0).abs() < 1e-15);
        assert!(f_test_equal_variance(&a, &[2.0, 2.0]).is_err());
    }

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), None);
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-50.0f64..50.0, 2..12)
    }

    proptest! {
        #[test]
        fn two_group_anova_is_squared_t(a in sample(), b in sample()) {
            let t = t_test_one_sided(&a, &b, false).unwrap();
            let f = one_way_anova(&[&a, &b]).unwrap();
            prop_assume!(!t.degenerate);
            prop_assert!((f.statistic - t.statistic * t.statistic).abs() < 1e-9 * f.statistic.max(1.0));
        }

        #[test]
        fn statistics_are_location_scale_invariant(
            a in sample(), b in sample(), shift in -100.0f64..100.0, scale in 0.1f64..10.0,
        ) {
            let tr = |xs: &[f64]| xs.iter().map(|x| x * scale + shift).collect::<Vec<_>>();
            let (a2, b2) = (tr(&a), tr(&b));
            let t1 = t_test_one_sided(&a, &b, false).unwrap();
            let t2 = t_test_one_sided(&a2, &b2, false).unwrap();
            prop_assume!(!t1.degenerate);
            prop_assert!((t1.statistic - t2.statistic).abs() < 1e-7 * t1.statistic.abs().max(1.0));
            let u1 = mann_whitney_u_one_sided(&a, &b).unwrap();
            let u2 = mann_whitney_u_one_sided(&a2, &b2).unwrap();
            prop_assert_eq!(u1.statistic, u2.statistic);
        }

        #[test]
        fn p_values_in_unit_interval(a in sample(), b in sample()) {
            for r in [
                t_test_one_sided(&a, &b, false).unwrap(),
                t_test_one_sided(&a, &b, true).unwrap(),
                mann_whitney_u_one_sided(&a, &b).unwrap(),
            ] {
                prop_assert!((0.0..=1.0).contains(&r.p_value));
            }
        }
    }
}
