use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScheduleKind<T> {
    /// c for every n.
    Constant { value: T },
    /// 1/(n+1)^p with p > 0.
    Power { exponent: T },
    /// (n+1)/(n+2).
    RationalShift,
    /// c₀·rⁿ with |r| ≤ 1.
    Geometric { ratio: T, initial: T },
    /// Explicit values for n = 1, 2, …; the last value is held afterwards.
    Table { values: Vec<T> },
}

/// Parameter sequence evaluated at the loop index n ≥ 1.
///
/// Summability and the closed range containing every value (and the limit)
/// are derived from the kind at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule<T> {
    kind: ScheduleKind<T>,
    declared_summable: bool,
    declared_range: (T, T),
}

fn finite<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "must be finite".into(),
        })
    }
}

impl<T: Scalar> Schedule<T> {
    pub fn constant(value: T) -> Result<Self> {
        finite("constant", value)?;
        Ok(Self {
            kind: ScheduleKind::Constant { value },
            declared_summable: value.is_zero(),
            declared_range: (value, value),
        })
    }

    pub fn power(exponent: T) -> Result<Self> {
        if !(exponent > T::zero()) || !exponent.is_finite() {
            return Err(Error::InvalidParameter {
                name: "power exponent",
                reason: "must be positive and finite".into(),
            });
        }
        Ok(Self {
            kind: ScheduleKind::Power { exponent },
            declared_summable: exponent > T::one(),
            declared_range: (T::zero(), T::one() / T::two().powf(exponent)),
        })
    }

    pub fn rational_shift() -> Self {
        Self {
            kind: ScheduleKind::RationalShift,
            declared_summable: false,
            declared_range: (T::lit(2.0) / T::lit(3.0), T::one()),
        }
    }

    pub fn geometric(ratio: T, initial: T) -> Result<Self> {
        finite("geometric initial", initial)?;
        if !(ratio.abs() <= T::one()) {
            return Err(Error::InvalidParameter {
                name: "geometric ratio",
                reason: "|r| must not exceed 1".into(),
            });
        }
        let first = initial * ratio;
        let second = first * ratio;
        let contracting = ratio.abs() < T::one();
        let (mut lo, mut hi) = (first.min(second), first.max(second));
        if contracting {
            lo = lo.min(T::zero());
            hi = hi.max(T::zero());
        }
        Ok(Self {
            kind: ScheduleKind::Geometric { ratio, initial },
            declared_summable: contracting || initial.is_zero(),
            declared_range: (lo, hi),
        })
    }

    pub fn table(values: Vec<T>) -> Result<Self> {
        let Some(&last) = values.last() else {
            return Err(Error::InvalidParameter {
                name: "table",
                reason: "needs at least one value".into(),
            });
        };
        for &v in &values {
            finite("table entry", v)?;
        }
        let lo = values.iter().copied().fold(T::infinity(), T::min);
        let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
        Ok(Self {
            kind: ScheduleKind::Table { values },
            declared_summable: last.is_zero(),
            declared_range: (lo, hi),
        })
    }

    pub fn kind(&self) -> &ScheduleKind<T> {
        &self.kind
    }

    pub fn declared_summable(&self) -> bool {
        self.declared_summable
    }

    pub fn declared_range(&self) -> (T, T) {
        self.declared_range
    }

    fn raw(&self, n: usize) -> T {
        let nf = T::lit(n as f64);
        match &self.kind {
            ScheduleKind::Constant { value } => *value,
            ScheduleKind::Power { exponent } => T::one() / (nf + T::one()).powf(*exponent),
            ScheduleKind::RationalShift => (nf + T::one()) / (nf + T::two()),
            ScheduleKind::Geometric { ratio, initial } => {
                *initial * ratio.powi(n.min(i32::MAX as usize) as i32)
            }
            ScheduleKind::Table { values } => values[(n.max(1) - 1).min(values.len() - 1)],
        }
    }

    /// Value at loop index `n` (n ≥ 1), checked against the declared range.
    pub fn value(&self, n: usize) -> Result<T> {
        let v = self.raw(n);
        let (lo, hi) = self.declared_range;
        if !(v >= lo && v <= hi) {
            return Err(Error::ScheduleOutOfRange {
                schedule: self.label(),
                n,
                value: v.to_f64_lossy(),
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            });
        }
        Ok(v)
    }

    /// Short textual form, e.g. `constant(0.98)` or `geometric(0.5; 0.5)`.
    pub fn label(&self) -> String {
        match &self.kind {
            ScheduleKind::Constant { value } => format!("constant({value})"),
            ScheduleKind::Power { exponent } => format!("power({exponent})"),
            ScheduleKind::RationalShift => "rational_shift".to_string(),
            ScheduleKind::Geometric { ratio, initial } => format!("geometric({ratio}; {initial})"),
            ScheduleKind::Table { values } => {
                let body: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                format!("table([{}])", body.join(", "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_schedules() {
        let alpha = Schedule::<f64>::power(1.0).unwrap();
        assert_eq!(alpha.value(1).unwrap(), 0.5);
        assert_eq!(alpha.value(3).unwrap(), 0.25);
        assert!(!alpha.declared_summable());

        let beta = Schedule::<f64>::rational_shift();
        assert_eq!(beta.value(1).unwrap(), 2.0 / 3.0);
        assert_eq!(beta.value(2).unwrap(), 0.75);

        let theta = Schedule::<f64>::geometric(0.5, 0.5).unwrap();
        assert_eq!(theta.value(1).unwrap(), 0.25);
        assert_eq!(theta.value(3).unwrap(), 0.0625);
        assert!(theta.declared_summable());
    }

    #[test]
    fn summability_follows_kind() {
        assert!(!Schedule::constant(0.98).unwrap().declared_summable());
        assert!(Schedule::constant(0.0).unwrap().declared_summable());
        assert!(Schedule::power(1.5).unwrap().declared_summable());
        assert!(!Schedule::geometric(1.0, 0.3).unwrap().declared_summable());
        assert!(Schedule::table(vec![0.3, 0.1, 0.0])
            .unwrap()
            .declared_summable());
        assert!(!Schedule::table(vec![0.3]).unwrap().declared_summable());
    }

    #[test]
    fn table_holds_last_value() {
        let t = Schedule::table(vec![0.3, 0.2]).unwrap();
        assert_eq!(t.value(1).unwrap(), 0.3);
        assert_eq!(t.value(2).unwrap(), 0.2);
        assert_eq!(t.value(50).unwrap(), 0.2);
        assert_eq!(t.declared_range(), (0.2, 0.3));
    }

    #[test]
    fn values_stay_in_declared_range() {
        let schedules = [
            Schedule::<f64>::power(0.7).unwrap(),
            Schedule::rational_shift(),
            Schedule::geometric(-0.9, 2.0).unwrap(),
            Schedule::geometric(1.0, 0.4).unwrap(),
            Schedule::constant(0.3).unwrap(),
        ];
        for s in &schedules {
            for n in 1..2000 {
                s.value(n).unwrap();
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(Schedule::<f64>::power(0.0).is_err());
        assert!(Schedule::<f64>::geometric(1.5, 1.0).is_err());
        assert!(Schedule::<f64>::table(vec![]).is_err());
        assert!(Schedule::<f64>::constant(f64::NAN).is_err());
    }
}
