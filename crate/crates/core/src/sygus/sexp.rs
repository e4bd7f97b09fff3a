//! S-expression reader for SyGuS files.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Symbol(String),
    Str(String),
    /// Non-negative numeral; negative integers are written `(- n)`.
    Int(i64),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn sym(s: &str) -> Sexp {
        Sexp::Symbol(s.to_string())
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Sexp::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs) => Some(xs),
            _ => None,
        }
    }

    /// The head symbol of a list.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_symbol()
    }
}

/// Writes a string literal with SMT-LIB escaping: `"` is doubled.
pub fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Symbol(s) => f.write_str(s),
            Sexp::Str(s) => f.write_str(&quote(s)),
            Sexp::Int(n) => write!(f, "{n}"),
            Sexp::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
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

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SexpError {
    #[error("{pos}: unterminated string literal")]
    UnterminatedString { pos: Pos },
    #[error("{pos}: unexpected `)`")]
    UnexpectedClose { pos: Pos },
    #[error("{pos}: unclosed `(`")]
    Unclosed { pos: Pos },
    #[error("{pos}: numeral `{text}` does not fit in 64 bits")]
    Numeral { pos: Pos, text: String },
    #[error("{pos}: unexpected character {ch:?}")]
    BadChar { pos: Pos, ch: char },
}

/// A `;; @key value` comment line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Directive {
    pub key: String,
    pub value: String,
    pub pos: Pos,
}

/// Top-level forms with their start positions, plus directives found in
/// comments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub forms: Vec<(Pos, Sexp)>,
    pub directives: Vec<Directive>,
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
    directives: Vec<Directive>,
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                let pos = self.pos();
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                self.directive(&text, pos);
            } else {
                break;
            }
        }
    }

    fn directive(&mut self, comment: &str, pos: Pos) {
        let body = comment.trim_start_matches(';').trim_start();
        let Some(rest) = body.strip_prefix('@') else {
            return;
        };
        let (key, value) = match rest.find(char::is_whitespace) {
            Some(i) => (&rest[..i], rest[i..].trim()),
            None => (rest, ""),
        };
        self.directives.push(Directive {
            key: key.to_string(),
            value: value.to_string(),
            pos,
        });
    }

    fn string(&mut self, pos: Pos) -> Result<Sexp, SexpError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(SexpError::UnterminatedString { pos }),
                Some('"') => {
                    if self.chars.peek() == Some(&'"') {
                        self.bump();
                        s.push('"');
                    } else {
                        return Ok(Sexp::Str(s));
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn atom(&mut self, pos: Pos) -> Result<Sexp, SexpError> {
        let mut text = String::new();
        if self.chars.peek() == Some(&'|') {
            self.bump();
            while let Some(c) = self.bump() {
                if c == '|' {
                    return Ok(Sexp::Symbol(text));
                }
                text.push(c);
            }
            return Err(SexpError::UnterminatedString { pos });
        }
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';') {
                break;
            }
            text.push(c);
            self.bump();
        }
        if text.is_empty() {
            let ch = self.chars.peek().copied().unwrap_or(' ');
            return Err(SexpError::BadChar { pos, ch });
        }
        if text.bytes().all(|b| b.is_ascii_digit()) {
            return text
                .parse()
                .map(Sexp::Int)
                .map_err(|_| SexpError::Numeral { pos, text });
        }
        Ok(Sexp::Symbol(text))
    }

    fn form(&mut self) -> Result<Option<(Pos, Sexp)>, SexpError> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let sexp = match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(SexpError::Unclosed { pos }),
                        Some(')') => {
                            self.bump();
                            break;
                        }
                        Some(_) => {
                            let (_, x) = self.form()?.ok_or(SexpError::Unclosed { pos })?;
                            items.push(x);
                        }
                    }
                }
                Sexp::List(items)
            }
            ')' => return Err(SexpError::UnexpectedClose { pos }),
            '"' => self.string(pos)?,
            _ => self.atom(pos)?,
        };
        Ok(Some((pos, sexp)))
    }
}

/// Reads every top-level form in `text`.
pub fn read(text: &str) -> Result<Document, SexpError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
        directives: Vec::new(),
    };
    let mut forms = Vec::new();
    while let Some(f) = r.form()? {
        forms.push(f);
    }
    Ok(Document {
        forms,
        directives: r.directives,
    })
}
