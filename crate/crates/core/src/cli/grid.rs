use crate::error::{Error, Result};

/// Parses `start:stop:count[:log]`, a comma list, or a single value.
pub fn parse_q_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("bad number '{s}' in q grid")))
    };
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let log = match parts.len() {
            3 => false,
            4 if parts[3] == "log" => true,
            4 if parts[3] == "lin" => false,
            _ => {
                return Err(Error::invalid(format!(
                    "q grid '{spec}' is not start:stop:count[:log]"
                )))
            }
        };
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad count '{}' in q grid", parts[2])))?;
        if log && !(start > 0.0 && stop > 0.0) {
            return Err(Error::invalid("log grid needs positive endpoints"));
        }
        (0..count)
            .map(|i| {
                if i == 0 {
                    return start;
                }
                if i == count - 1 {
                    return stop;
                }
                let t = i as f64 / (count - 1) as f64;
                if log {
                    (start.ln() + t * (stop.ln() - start.ln())).exp()
                } else {
                    start + t * (stop - start)
                }
            })
            .collect()
    } else if spec.is_empty() {
        Vec::new()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<f64>>>()?
    };
    if grid.is_empty() {
        return Err(Error::invalid("q grid is empty"));
    }
    if let Some(q) = grid.iter().find(|q| !(**q >= 0.0 && q.is_finite())) {
        return Err(Error::invalid(format!(
            "q grid value {q} is not a finite nonnegative number"
        )));
    }
    Ok(grid)
}

/// Comma-separated list of positive tone counts.
pub fn parse_n_list(spec: &str) -> Result<Vec<usize>> {
    let list = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::invalid(format!("bad tone count '{s}'"))),
        })
        .collect::<Result<Vec<usize>>>()?;
    if list.is_empty() {
        return Err(Error::invalid("N list is empty"));
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log() {
        assert_eq!(
            parse_q_grid("0:1:5").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        let g = parse_q_grid("1e-3:1:4:log").unwrap();
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[3], 1.0);
        assert!((g[1] - 1e-2).abs() < 1e-15 && (g[2] - 1e-1).abs() < 1e-14);
        assert_eq!(parse_q_grid("2:9:1").unwrap(), vec![2.0]);
    }

    #[test]
    fn lists() {
        assert_eq!(parse_q_grid("0.5, 2").unwrap(), vec![0.5, 2.0]);
        assert_eq!(parse_q_grid("3").unwrap(), vec![3.0]);
        assert_eq!(parse_n_list("4,8,16").unwrap(), vec![4, 8, 16]);
    }

    #[test]
    fn rejects() {
        for bad in [
            "",
            "0:1:0",
            "0:1:3:log",
            "a",
            "1:2",
            "-1",
            "1:2:3:cubic",
            "inf",
        ] {
            assert!(parse_q_grid(bad).is_err(), "{bad}");
        }
        for bad in ["", "0", "3,x", "-2"] {
            assert!(parse_n_list(bad).is_err(), "{bad}");
        }
    }
}
