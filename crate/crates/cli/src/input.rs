//! Plain-text operator files: a header line holding `N`, the `N` weights of
//! μ, `N` matrix rows, then any number of vector rows. Entries are separated
//! by whitespace; complex entries are written `a+bi`, `a-bi`, `bi` or `a`.

use specnorm::{Mat, C64};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct OperatorFile {
    pub weights: Vec<f64>,
    pub matrix: Mat<C64>,
    pub vectors: Vec<Vec<C64>>,
}

pub fn parse_complex(token: &str) -> Option<C64> {
    let t = token.trim();
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    // Split before the last sign that is not an exponent sign.
    let bytes = body.as_bytes();
    let split =
        (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    Some(C64::new(re, im))
}

impl OperatorFile {
    pub fn parse(path: &str, text: &str) -> CliResult<Self> {
        let err = |line: usize, reason: String| CliError::Input { path: path.to_string(), line, reason };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let n: usize = header.parse().map_err(|_| err(hline, format!("header must be N, got {header:?}")))?;
        if n == 0 {
            return Err(err(hline, "N must be positive".into()));
        }
        let mut row = |what: &str| -> CliResult<Option<(usize, Vec<C64>)>> {
            let Some((ln, l)) = lines.next() else { return Ok(None) };
            let entries = l
                .split_whitespace()
                .map(|t| parse_complex(t).ok_or_else(|| err(ln, format!("bad entry {t:?}"))))
                .collect::<CliResult<Vec<_>>>()?;
            if entries.len() != n {
                return Err(err(ln, format!("{what} row has {} entries, expected {n}", entries.len())));
            }
            Ok(Some((ln, entries)))
        };

        let (wline, w) = row("weight")?.ok_or_else(|| err(hline, "missing weight row".into()))?;
        if w.iter().any(|z| z.im != 0.0) {
            return Err(err(wline, "weights must be real".into()));
        }
        let weights = w.iter().map(|z| z.re).collect();
        let mut matrix = Mat::<C64>::zeros(n, n);
        for i in 0..n {
            let (_, r) = row("matrix")?.ok_or_else(|| err(wline, format!("missing matrix row {}", i + 1)))?;
            for (j, z) in r.into_iter().enumerate() {
                matrix[(i, j)] = z;
            }
        }
        let mut vectors = Vec::new();
        while let Some((_, v)) = row("vector")? {
            vectors.push(v);
        }
        Ok(Self { weights, matrix, vectors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_tokens() {
        let c = |re, im| Some(C64::new(re, im));
        assert_eq!(parse_complex("1.5"), c(1.5, 0.0));
        assert_eq!(parse_complex("-2"), c(-2.0, 0.0));
        assert_eq!(parse_complex("1+2i"), c(1.0, 2.0));
        assert_eq!(parse_complex("1-2i"), c(1.0, -2.0));
        assert_eq!(parse_complex("-3i"), c(0.0, -3.0));
        assert_eq!(parse_complex("i"), c(0.0, 1.0));
        assert_eq!(parse_complex("2-i"), c(2.0, -1.0));
        assert_eq!(parse_complex("1e-3+2.5E+2i"), c(1e-3, 250.0));
        assert_eq!(parse_complex("-1e-3-4e-1i"), c(-1e-3, -0.4));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex("1+xi"), None);
    }

    #[test]
    fn parses_operator_file() {
        let text = "# weighted 2x2\n2\n1 4\n1 2\n0.5 1\n1 0\n0+1i 1-1i\n";
        let f = OperatorFile::parse("x", text).unwrap();
        assert_eq!(f.weights, vec![1.0, 4.0]);
        assert_eq!(f.matrix[(0, 1)], C64::new(2.0, 0.0));
        assert_eq!(f.vectors.len(), 2);
        assert_eq!(f.vectors[1][1], C64::new(1.0, -1.0));
    }

    #[test]
    fn reports_bad_lines() {
        let e = OperatorFile::parse("f", "2\n1 1\n1 0\n0\n").unwrap_err();
        assert!(e.to_string().starts_with("f:4:"), "{e}");
        let e = OperatorFile::parse("f", "2\n1 1i\n").unwrap_err();
        assert!(e.to_string().contains("real"), "{e}");
        assert!(OperatorFile::parse("f", "").is_err());
        assert!(OperatorFile::parse("f", "2\n1 1\n1 0\n").is_err());
    }
}
