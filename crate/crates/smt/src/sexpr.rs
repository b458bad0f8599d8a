//! Minimal S-expression reader for SMT-LIB 2 scripts.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    /// Symbols, keywords, numerals and string literals, all kept verbatim.
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s) => Some(s),
            SExpr::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::Atom(_) => None,
            SExpr::List(items) => Some(items),
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(s) => write!(f, "{s}"),
            SExpr::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Parses every toplevel S-expression in the input. Comments (`;` to end
/// of line) are skipped; string literals may contain parentheses.
pub fn parse_all(input: &str) -> Result<Vec<SExpr>, String> {
    let mut parser = Parser { chars: input.chars().collect(), pos: 0 };
    let mut out = Vec::new();
    loop {
        parser.skip_trivia();
        if parser.eof() {
            return Ok(out);
        }
        out.push(parser.parse_expr()?);
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn eof(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn parse_expr(&mut self) -> Result<SExpr, String> {
        self.skip_trivia();
        match self.peek() {
            None => Err("unexpected end of input".into()),
            Some('(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        None => return Err("unbalanced parenthesis".into()),
                        Some(')') => {
                            self.pos += 1;
                            return Ok(SExpr::List(items));
                        }
                        Some(_) => items.push(self.parse_expr()?),
                    }
                }
            }
            Some(')') => Err("unexpected ')'".into()),
            Some('"') => {
                let mut s = String::from('"');
                self.pos += 1;
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    s.push(c);
                    if c == '"' {
                        return Ok(SExpr::Atom(s));
                    }
                }
                Err("unterminated string literal".into())
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    self.pos += 1;
                }
                Ok(SExpr::Atom(s))
            }
        }
    }
}
