//! A small S-expression reader that keeps source positions.
//!
//! Atoms are maximal runs of characters other than whitespace, parentheses,
//! `;` and `"`. A `;` starts a comment that runs to the end of the line.

use std::fmt;

/// One-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: Pos, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom { text: String, pos: Pos },
    List { items: Vec<SExpr>, pos: Pos },
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom { pos, .. } | SExpr::List { pos, .. } => *pos,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Atom { .. } => None,
        }
    }

    /// The leading atom of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom { text, .. } => f.write_str(text),
            SExpr::List { items, .. } => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

const MAX_DEPTH: usize = 256;

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
    depth: usize,
}

impl<'a> Reader<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<SExpr>, Diagnostic> {
        self.skip_blank();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => Ok(None),
            Some(')') => Err(Diagnostic::new(start, "unbalanced ')'")),
            Some('"') => Err(Diagnostic::new(start, "string literals are not supported")),
            Some('(') => {
                if self.depth == MAX_DEPTH {
                    return Err(Diagnostic::new(start, "nesting too deep"));
                }
                self.bump();
                self.depth += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => return Err(Diagnostic::new(start, "unclosed '('")),
                        Some(')') => {
                            self.bump();
                            self.depth -= 1;
                            return Ok(Some(SExpr::List { items, pos: start }));
                        }
                        Some(_) => items.push(self.read()?.expect("input is not exhausted")),
                    }
                }
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '"') {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Some(SExpr::Atom { text, pos: start }))
            }
        }
    }
}

/// Reads every top-level expression of `text`.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, Diagnostic> {
    let mut reader = Reader {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
        depth: 0,
    };
    let mut out = Vec::new();
    while let Some(e) = reader.read()? {
        out.push(e);
    }
    Ok(out)
}
