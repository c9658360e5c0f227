//! Named spatial profiles and time signals used for coefficients, initial
//! data, and boundary data.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// A function of space given by a preset name and numeric coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `value`
    Const(f64),
    /// `offset + amplitude * exp(-((x - center) / width)^2)`
    Gauss {
        amplitude: f64,
        center: f64,
        width: f64,
        offset: f64,
    },
    /// `offset + amplitude * sin(k * pi * x + phase)`
    Sine {
        offset: f64,
        amplitude: f64,
        k: f64,
        phase: f64,
    },
    /// `left` for x < interface, `right` otherwise.
    Step { left: f64, right: f64, interface: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Const(v) => v,
            Profile::Gauss {
                amplitude,
                center,
                width,
                offset,
            } => offset + amplitude * (-((x - center) / width).powi(2)).exp(),
            Profile::Sine {
                offset,
                amplitude,
                k,
                phase,
            } => offset + amplitude * (k * PI * x + phase).sin(),
            Profile::Step {
                left,
                right,
                interface,
            } => {
                if x < interface {
                    left
                } else {
                    right
                }
            }
        }
    }
}

/// A function of time given by a preset name and numeric coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Signal {
    Zero,
    Const(f64),
    /// `amplitude * sin^2(pi t / duration)` on [0, duration], zero afterwards.
    Pulse { amplitude: f64, duration: f64 },
    /// `amplitude * sin(2 pi frequency t)`
    Sine { amplitude: f64, frequency: f64 },
}

impl Signal {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Signal::Zero => 0.0,
            Signal::Const(v) => v,
            Signal::Pulse {
                amplitude,
                duration,
            } => {
                if (0.0..=duration).contains(&t) {
                    amplitude * (PI * t / duration).sin().powi(2)
                } else {
                    0.0
                }
            }
            Signal::Sine {
                amplitude,
                frequency,
            } => amplitude * (2.0 * PI * frequency * t).sin(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Signal::Zero)
    }
}

fn parse_call(s: &str) -> Result<(String, Vec<f64>), String> {
    let s = s.trim();
    let (name, args) = match s.find('(') {
        Some(open) => {
            let close = s
                .rfind(')')
                .filter(|&c| c == s.len() - 1)
                .ok_or_else(|| format!("missing ')' in '{s}'"))?;
            (&s[..open], &s[open + 1..close])
        }
        None => (s, ""),
    };
    let args = args
        .split(',')
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(|a| a.parse::<f64>().map_err(|_| format!("bad number '{a}' in '{s}'")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((name.trim().to_string(), args))
}

fn arity(name: &str, args: &[f64], allowed: &[usize]) -> Result<(), String> {
    if allowed.contains(&args.len()) {
        Ok(())
    } else {
        Err(format!(
            "preset '{name}' takes {allowed:?} arguments, got {}",
            args.len()
        ))
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Ok(v) = s.trim().parse::<f64>() {
            return Ok(Profile::Const(v));
        }
        let (name, a) = parse_call(s)?;
        match name.as_str() {
            "const" => {
                arity(&name, &a, &[1])?;
                Ok(Profile::Const(a[0]))
            }
            "gauss" => {
                arity(&name, &a, &[3, 4])?;
                if a[2] <= 0.0 {
                    return Err("gauss width must be positive".into());
                }
                Ok(Profile::Gauss {
                    amplitude: a[0],
                    center: a[1],
                    width: a[2],
                    offset: a.get(3).copied().unwrap_or(0.0),
                })
            }
            "sine" => {
                arity(&name, &a, &[3, 4])?;
                Ok(Profile::Sine {
                    offset: a[0],
                    amplitude: a[1],
                    k: a[2],
                    phase: a.get(3).copied().unwrap_or(0.0),
                })
            }
            "step" => {
                arity(&name, &a, &[3])?;
                Ok(Profile::Step {
                    left: a[0],
                    right: a[1],
                    interface: a[2],
                })
            }
            other => Err(format!("unknown profile preset '{other}'")),
        }
    }
}

impl FromStr for Signal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Ok(v) = s.trim().parse::<f64>() {
            return Ok(if v == 0.0 { Signal::Zero } else { Signal::Const(v) });
        }
        let (name, a) = parse_call(s)?;
        match name.as_str() {
            "zero" => {
                arity(&name, &a, &[0])?;
                Ok(Signal::Zero)
            }
            "const" => {
                arity(&name, &a, &[1])?;
                Ok(Signal::Const(a[0]))
            }
            "pulse" => {
                arity(&name, &a, &[2])?;
                if a[1] <= 0.0 {
                    return Err("pulse duration must be positive".into());
                }
                Ok(Signal::Pulse {
                    amplitude: a[0],
                    duration: a[1],
                })
            }
            "sine" => {
                arity(&name, &a, &[2])?;
                Ok(Signal::Sine {
                    amplitude: a[0],
                    frequency: a[1],
                })
            }
            other => Err(format!("unknown signal preset '{other}'")),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Const(v) => write!(f, "const({v})"),
            Profile::Gauss {
                amplitude,
                center,
                width,
                offset,
            } => write!(f, "gauss({amplitude}, {center}, {width}, {offset})"),
            Profile::Sine {
                offset,
                amplitude,
                k,
                phase,
            } => write!(f, "sine({offset}, {amplitude}, {k}, {phase})"),
            Profile::Step {
                left,
                right,
                interface,
            } => write!(f, "step({left}, {right}, {interface})"),
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Zero => write!(f, "zero"),
            Signal::Const(v) => write!(f, "const({v})"),
            Signal::Pulse {
                amplitude,
                duration,
            } => write!(f, "pulse({amplitude}, {duration})"),
            Signal::Sine {
                amplitude,
                frequency,
            } => write!(f, "sine({amplitude}, {frequency})"),
        }
    }
}
