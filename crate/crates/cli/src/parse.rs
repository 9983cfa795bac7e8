//! Command-line value syntax: complex numbers as `a+bi`, lists separated by
//! commas, grids as `start:stop:count`.

use num_complex::Complex64;

pub fn complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let bad = || format!("cannot parse '{s}' as a complex number (expected a, bi or a+bi)");
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |p: &str| -> Result<f64, String> {
        match p {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => p.parse::<f64>().map_err(|_| bad()),
        }
    };
    let z = match split {
        Some(k) => Complex64::new(body[..k].parse::<f64>().map_err(|_| bad())?, imag(&body[k..])?),
        None => Complex64::new(0.0, imag(body)?),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

pub fn complex_list(s: &str) -> Result<Vec<Complex64>, String> {
    s.split(',').map(complex).collect()
}

pub fn real_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("cannot parse '{p}' as a number")))
        .collect()
}

/// `start:stop:count`, endpoints included.
pub fn axis(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, k] = parts[..] else {
        return Err(format!("grid axis '{s}' must be start:stop:count"));
    };
    let a: f64 = a.trim().parse().map_err(|_| format!("bad grid start in '{s}'"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad grid stop in '{s}'"))?;
    let k: usize = k.trim().parse().map_err(|_| format!("bad grid count in '{s}'"))?;
    if !(a.is_finite() && b.is_finite()) || k == 0 || k > 100_000 {
        return Err(format!("grid axis '{s}' must be finite with 1 <= count <= 100000"));
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    Ok((0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect())
}

/// Tensor product of the axes, first axis slowest.
pub fn grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for ax in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                ax.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// `key = value` lines; `#` starts a comment.
pub fn config_file(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key = value", lineno + 1));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("0.3+0.2i").unwrap(), Complex64::new(0.3, 0.2));
        assert_eq!(complex("0.1-0.1i").unwrap(), Complex64::new(0.1, -0.1));
        assert_eq!(complex("-2").unwrap(), Complex64::new(-2.0, 0.0));
        assert_eq!(complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(complex("1e-3-2.5e+1i").unwrap(), Complex64::new(1e-3, -25.0));
        assert_eq!(complex("4.5i").unwrap(), Complex64::new(0.0, 4.5));
        assert!(complex("1+").is_err() && complex("x").is_err() && complex("").is_err());
    }

    #[test]
    fn axes_and_grids() {
        assert_eq!(axis("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(axis("0:1").is_err() && axis("0:1:0").is_err());
        let g = grid(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(g, vec![vec![1.0, 3.0], vec![1.0, 4.0], vec![2.0, 3.0], vec![2.0, 4.0]]);
    }

    #[test]
    fn config_lines() {
        let c = config_file("# header\nrel_tol = 1e-6\n\nstep=0.1 # finer\n").unwrap();
        assert_eq!(c, vec![("rel_tol".into(), "1e-6".into()), ("step".into(), "0.1".into())]);
        assert!(config_file("oops").is_err());
    }
}
