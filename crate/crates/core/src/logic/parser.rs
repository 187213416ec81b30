use super::{normalize_vars, Formula, Query, Schema};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Not,
    Tilde,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        let (pos, ch) = chars[k];
        let single = match ch {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '!' => Some(Tok::Not),
            '~' => Some(Tok::Tilde),
            _ => None,
        };
        if let Some(t) = single {
            out.push((pos, t));
            k += 1;
            continue;
        }
        if ch.is_whitespace() {
            k += 1;
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let start = k;
            while k < chars.len() && (chars[k].1.is_alphanumeric() || chars[k].1 == '_') {
                k += 1;
            }
            let word: String = chars[start..k].iter().map(|(_, c)| c).collect();
            let tok = match word.strip_prefix('x') {
                Some(digits) if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) => {
                    let idx: usize = digits.parse().map_err(|_| Error::Parse {
                        pos,
                        msg: format!("variable index too large in {word}"),
                    })?;
                    if idx == 0 {
                        return Err(Error::Parse {
                            pos,
                            msg: "variables are numbered from x1".into(),
                        });
                    }
                    Tok::Var(idx)
                }
                _ => Tok::Ident(word),
            };
            out.push((pos, tok));
            continue;
        }
        return Err(Error::Parse {
            pos,
            msg: format!("unexpected character {ch:?}"),
        });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    schema: &'a Schema,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn var(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Var(v)) => {
                let v = *v;
                self.at += 1;
                Ok(v)
            }
            _ => self.err("expected a variable"),
        }
    }

    fn query(&mut self) -> Result<(Vec<usize>, Formula)> {
        let mut head = vec![self.var()?];
        while self.peek() == Some(&Tok::Comma) {
            self.at += 1;
            head.push(self.var()?);
        }
        self.expect(Tok::Dot, "`.` after the answer variables")?;
        let body = self.formula()?;
        if self.at != self.toks.len() {
            return self.err("unexpected trailing input");
        }
        Ok((head, body))
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut f = self.conj()?;
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            f = Formula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Not) => {
                self.at += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Ident(w)) if w == "exists" || w == "forall" => {
                let universal = w == "forall";
                self.at += 1;
                let v = self.var()?;
                let body = self.unary()?;
                Ok(if universal {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        let start = self.pos();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.at += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Var(i)) => {
                self.at += 1;
                self.expect(Tok::Tilde, "`~`")?;
                let j = self.var()?;
                Ok(Formula::EqAtom(i, j))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                self.expect(Tok::LParen, "`(` after a relation name")?;
                let mut vars = vec![self.var()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                    vars.push(self.var()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                match self.schema.arity(&name) {
                    None => Err(Error::Semantic(format!("unknown relation {name} at {start}"))),
                    Some(a) if a != vars.len() => Err(Error::Semantic(format!(
                        "relation {name} has arity {a}, used with {} arguments at {start}",
                        vars.len()
                    ))),
                    Some(_) => Ok(Formula::Atom(name, vars)),
                }
            }
            _ => self.err("expected a formula"),
        }
    }
}

/// Parses a query exactly as written.
pub fn parse_query_raw(text: &str, schema: &Schema) -> Result<Query> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        end: text.len(),
        schema,
    };
    let (head, body) = p.query()?;
    Query::new(head, body)
}

/// Parses a query and makes its relational atoms variable-disjoint.
pub fn parse_query(text: &str, schema: &Schema) -> Result<Query> {
    Ok(normalize_vars(&parse_query_raw(text, schema)?))
}
