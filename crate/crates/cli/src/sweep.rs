//! Parameter grids given on the command line.

use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// `start:stop:points[:linear|log]`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    start: f64,
    stop: f64,
    points: usize,
    scale: Scale,
}

impl SweepSpec {
    pub fn new(start: f64, stop: f64, points: usize, scale: Scale) -> Result<Self, CliError> {
        if !(start.is_finite() && stop.is_finite()) {
            return Err(CliError::usage("sweep bounds must be finite"));
        }
        if start >= stop {
            return Err(CliError::usage(format!("sweep needs start < stop, got {start} >= {stop}")));
        }
        if points < 2 {
            return Err(CliError::usage("sweep needs at least 2 points"));
        }
        if scale == Scale::Log && start <= 0.0 {
            return Err(CliError::usage("log sweep needs start > 0"));
        }
        Ok(Self { start, stop, points, scale })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i + 1 == self.points {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

/// A sweep or an explicit comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Sweep(SweepSpec),
    List(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Sweep(s) => s.values(),
            Grid::List(v) => v.clone(),
        }
    }
}

pub(crate) fn parse_number(s: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::usage(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(CliError::usage(format!("not a finite number: {s:?}")));
    }
    Ok(v)
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    let v = s.split(',').map(parse_number).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err(CliError::usage("empty list"));
    }
    Ok(v)
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if !s.contains(':') {
            return parse_list(s).map(Grid::List);
        }
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(CliError::usage(format!("sweep must be start:stop:points[:linear|log], got {s:?}")));
        }
        let points: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("sweep point count is not an integer: {:?}", parts[2])))?;
        let scale = match parts.get(3).map(|p| p.trim()) {
            None | Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(other) => return Err(CliError::usage(format!("unknown sweep scale {other:?}"))),
        };
        SweepSpec::new(parse_number(parts[0])?, parse_number(parts[1])?, points, scale).map(Grid::Sweep)
    }
}
