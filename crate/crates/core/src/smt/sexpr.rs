use std::fmt;
use std::io::BufRead;

/// S-expression as read from or written to an SMT-LIB stream. String
/// literals keep their quotes; `|quoted|` symbols are stored without bars.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn atom(s: impl Into<String>) -> Self {
        SExpr::Atom(s.into())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s) => Some(s),
            SExpr::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(v) => Some(v),
            SExpr::Atom(_) => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|v| v.first()).and_then(SExpr::as_atom)
    }

    pub fn is_atom(&self, s: &str) -> bool {
        self.as_atom() == Some(s)
    }
}

fn needs_bars(s: &str) -> bool {
    s.is_empty()
        || s.starts_with('"')
        || s.chars().any(|c| c.is_whitespace() || c == '(' || c == ')' || c == ';' || c == '|')
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(s) if needs_bars(s) && !s.starts_with('"') => write!(f, "|{s}|"),
            SExpr::Atom(s) => f.write_str(s),
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("s-expression syntax error at offset {offset}: {message}")]
pub struct SExprError {
    pub offset: usize,
    pub message: String,
}

/// Result of scanning for the first complete expression in a buffer.
enum Scan {
    Complete(SExpr, usize),
    Incomplete,
    Empty,
}

fn scan(text: &str) -> Result<Scan, SExprError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<Vec<SExpr>> = Vec::new();
    let mut i = 0;
    let err = |offset, m: &str| SExprError { offset, message: m.to_string() };
    while i < bytes.len() {
        let c = bytes[i];
        let done = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                None
            }
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                None
            }
            b'(' => {
                stack.push(Vec::new());
                i += 1;
                None
            }
            b')' => {
                let list = stack.pop().ok_or_else(|| err(i, "unbalanced `)`"))?;
                i += 1;
                Some(SExpr::List(list))
            }
            b'"' => {
                let start = i;
                i += 1;
                loop {
                    if i >= bytes.len() {
                        return Ok(Scan::Incomplete);
                    }
                    if bytes[i] == b'"' {
                        // `""` is an escaped quote inside SMT-LIB strings.
                        if i + 1 < bytes.len() && bytes[i + 1] == b'"' {
                            i += 2;
                            continue;
                        }
                        i += 1;
                        break;
                    }
                    i += 1;
                }
                Some(SExpr::Atom(text[start..i].to_string()))
            }
            b'|' => {
                let start = i + 1;
                i += 1;
                while i < bytes.len() && bytes[i] != b'|' {
                    i += 1;
                }
                if i >= bytes.len() {
                    return Ok(Scan::Incomplete);
                }
                let s = text[start..i].to_string();
                i += 1;
                Some(SExpr::Atom(s))
            }
            _ => {
                let start = i;
                while i < bytes.len()
                    && !matches!(bytes[i], b' ' | b'\t' | b'\r' | b'\n' | b'(' | b')' | b';' | b'"')
                {
                    i += 1;
                }
                Some(SExpr::Atom(text[start..i].to_string()))
            }
        };
        if let Some(e) = done {
            match stack.last_mut() {
                Some(top) => top.push(e),
                None => return Ok(Scan::Complete(e, i)),
            }
        }
    }
    Ok(if stack.is_empty() { Scan::Empty } else { Scan::Incomplete })
}

/// Parses every expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<SExpr>, SExprError> {
    let mut out = Vec::new();
    let mut rest = text;
    let mut base = 0;
    loop {
        match scan(rest).map_err(|e| SExprError { offset: e.offset + base, ..e })? {
            Scan::Complete(e, used) => {
                out.push(e);
                rest = &rest[used..];
                base += used;
            }
            Scan::Empty => return Ok(out),
            Scan::Incomplete => {
                return Err(SExprError { offset: text.len(), message: "unexpected end of input".into() })
            }
        }
    }
}

/// Parses exactly one expression.
pub fn parse_one(text: &str) -> Result<SExpr, SExprError> {
    let mut v = parse_all(text)?;
    if v.len() != 1 {
        return Err(SExprError { offset: 0, message: format!("expected one expression, got {}", v.len()) });
    }
    Ok(v.pop().expect("length checked"))
}

/// Reads successive expressions from a line-oriented stream.
pub struct SExprReader<R> {
    inner: R,
    buf: String,
}

impl<R: BufRead> SExprReader<R> {
    pub fn new(inner: R) -> Self {
        SExprReader { inner, buf: String::new() }
    }

    /// Next complete expression, or `None` at end of stream.
    pub fn next_expr(&mut self) -> std::io::Result<Option<SExpr>> {
        loop {
            match scan(&self.buf) {
                Ok(Scan::Complete(e, used)) => {
                    self.buf.drain(..used);
                    return Ok(Some(e));
                }
                Ok(Scan::Empty) => self.buf.clear(),
                Ok(Scan::Incomplete) => {}
                Err(e) => {
                    return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, e))
                }
            }
            let mut line = String::new();
            if self.inner.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            self.buf.push_str(&line);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_lists_and_comments() {
        let v = parse_all("(a (b c)) ; note\n d \"x y\" |q r|").unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0].to_string(), "(a (b c))");
        assert!(v[1].is_atom("d"));
        assert!(v[2].is_atom("\"x y\""));
        assert!(v[3].is_atom("q r"));
        assert_eq!(v[3].to_string(), "|q r|");
    }

    #[test]
    fn reader_spans_lines() {
        let text = "sat\n(\n  (define-fun x () Int\n    0)\n)\nunsat\n";
        let mut r = SExprReader::new(text.as_bytes());
        assert!(r.next_expr().unwrap().unwrap().is_atom("sat"));
        let m = r.next_expr().unwrap().unwrap();
        assert_eq!(m.as_list().unwrap().len(), 1);
        assert!(r.next_expr().unwrap().unwrap().is_atom("unsat"));
        assert!(r.next_expr().unwrap().is_none());
    }

    #[test]
    fn unbalanced_is_an_error() {
        assert!(parse_all("(a))").is_err());
        assert!(parse_all("(a").is_err());
    }
}
