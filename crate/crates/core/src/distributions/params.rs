use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Mis,
    Apx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamMode {
    Asymptotic,
    Toy,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamsError {
    #[error("bandwidth k must be at least 1")]
    InvalidK,
    #[error("toy overrides: {0}")]
    InvalidToy(String),
    #[error("{quantity} at level {level} overflows 64 bits")]
    Overflow { level: usize, quantity: &'static str },
    #[error("n_{r} = {n} exceeds k^(20^(r+1))")]
    SizeBound { r: usize, n: u64 },
}

/// Per-level fooling/principal overrides; a single entry is reused for every level.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ToyOverrides {
    pub f: Vec<u64>,
    pub p: Vec<u64>,
}

/// Block counts for one recursion level.
///
/// `f_hat`, `p_hat`, `n_hat` describe one half; `f`, `p`, `n` the full
/// instance. Level 0 has only `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub f_hat: u64,
    pub p_hat: u64,
    pub n_hat: u64,
    pub f: u64,
    pub p: u64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub k: u64,
    pub r: usize,
    pub variant: Variant,
    pub mode: ParamMode,
    /// `levels[t]` for t in 0..=r.
    pub levels: Vec<Level>,
}

fn mul(a: u64, b: u64, level: usize, quantity: &'static str) -> Result<u64, ParamsError> {
    a.checked_mul(b).ok_or(ParamsError::Overflow { level, quantity })
}

fn add(a: u64, b: u64, level: usize, quantity: &'static str) -> Result<u64, ParamsError> {
    a.checked_add(b).ok_or(ParamsError::Overflow { level, quantity })
}

fn pick(v: &[u64], t: usize) -> u64 {
    if v.len() == 1 {
        v[0]
    } else {
        v[t - 1]
    }
}

pub fn make_params(k: u64, r: usize, toy: Option<&ToyOverrides>, variant: Variant) -> Result<Params, ParamsError> {
    if k == 0 {
        return Err(ParamsError::InvalidK);
    }
    if let Some(o) = toy {
        for (name, v) in [("f", &o.f), ("p", &o.p)] {
            if r > 0 && v.len() != 1 && v.len() != r {
                return Err(ParamsError::InvalidToy(format!("{name} needs 1 or {r} entries, got {}", v.len())));
            }
            if r > 0 && v.is_empty() {
                return Err(ParamsError::InvalidToy(format!("{name} is empty")));
            }
            if v.contains(&0) {
                return Err(ParamsError::InvalidToy(format!("{name} entries must be positive")));
            }
        }
    }
    let n0 = mul(2, k, 0, "n")?;
    let mut levels = vec![Level { f_hat: 0, p_hat: 0, n_hat: 0, f: 0, p: 0, n: n0 }];
    for t in 1..=r {
        let prev = levels[t - 1].n;
        let (f_hat, p_hat) = match toy {
            Some(o) => (pick(&o.f, t), pick(&o.p, t)),
            None => {
                let k6 = (0..6).try_fold(1u64, |acc, _| mul(acc, k, t, "k^6"))?;
                let n3 = (0..3).try_fold(1u64, |acc, _| mul(acc, prev, t, "n^3"))?;
                let f_hat = mul(k6, n3, t, "f_hat")?;
                (f_hat, mul(mul(k6, n3, t, "p_hat")?, f_hat, t, "p_hat")?)
            }
        };
        let n_hat = add(mul(prev - 1, f_hat, t, "n_hat")?, mul(prev, p_hat, t, "n_hat")?, t, "n_hat")?;
        let level = match variant {
            Variant::Mis => Level {
                f_hat,
                p_hat,
                n_hat,
                f: mul(2, f_hat, t, "f")?,
                p: mul(2, p_hat, t, "p")?,
                n: mul(2, n_hat, t, "n")?,
            },
            Variant::Apx => Level { f_hat, p_hat, n_hat, f: f_hat, p: p_hat, n: n_hat },
        };
        levels.push(level);
    }
    let params = Params {
        k,
        r,
        variant,
        mode: if toy.is_some() { ParamMode::Toy } else { ParamMode::Asymptotic },
        levels,
    };
    if params.mode == ParamMode::Asymptotic && k >= 2 && !params.within_size_bound() {
        return Err(ParamsError::SizeBound { r, n: params.n_r() });
    }
    Ok(params)
}

impl Params {
    pub fn level(&self, t: usize) -> &Level {
        &self.levels[t]
    }

    pub fn n(&self, t: usize) -> u64 {
        self.levels[t].n
    }

    pub fn n_r(&self) -> u64 {
        self.levels[self.r].n
    }

    /// log2(n_r) ≤ 20^(r+1)·log2(k). Vacuous at k = 1.
    pub fn within_size_bound(&self) -> bool {
        let lhs = (self.n_r() as f64).log2();
        let rhs = 20f64.powi(self.r as i32 + 1) * (self.k as f64).log2();
        lhs <= rhs
    }

    /// Σ_t f_t / p_t.
    pub fn fooling_ratio_sum(&self) -> BigRational {
        (1..=self.r)
            .map(|t| BigRational::new(BigInt::from(self.levels[t].f), BigInt::from(self.levels[t].p)))
            .sum()
    }
}

/// n_r/(2k) · (1 − Σ_t f_t/p_t), a lower bound on the maximum matching of
/// every matching hard instance. Can be nonpositive under toy overrides.
pub fn matching_size_bound(params: &Params) -> BigRational {
    let one = BigRational::from_integer(1.into());
    let base = BigRational::new(BigInt::from(params.n_r()), BigInt::from(2 * params.k));
    base * (one - params.fooling_ratio_sum())
}
