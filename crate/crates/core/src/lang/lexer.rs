use super::{Diagnostic, Location};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    At,
    Bar,
    Colon,
    Dot,
    Plus,
    Minus,
    Gt,
    Ge,
    Eq,
    Lolli,
}

impl Token {
    pub(crate) fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("`{s}`"),
            Token::Number(s) => format!("number `{s}`"),
            Token::LBrace => "`{`".into(),
            Token::RBrace => "`}`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
            Token::At => "`@`".into(),
            Token::Bar => "`|`".into(),
            Token::Colon => "`:`".into(),
            Token::Dot => "`.`".into(),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Gt => "`>`".into(),
            Token::Ge => "`>=`".into(),
            Token::Eq => "`=`".into(),
            Token::Lolli => "`-o`".into(),
        }
    }
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub(crate) fn lex(text: &str) -> Result<Vec<(Token, Location)>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let here = Location { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let token = if c.is_alphabetic() || c == '_' {
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            Token::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && (chars[i] == '.' || chars[i] == '/') && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            Token::Number(chars[start..i].iter().collect())
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, width) = match (c, next) {
                ('-', Some('o')) if !chars.get(i + 2).is_some_and(|&c| ident_char(c)) => (Token::Lolli, 2),
                ('>', Some('=')) => (Token::Ge, 2),
                ('{', _) => (Token::LBrace, 1),
                ('}', _) => (Token::RBrace, 1),
                ('(', _) => (Token::LParen, 1),
                (')', _) => (Token::RParen, 1),
                (',', _) => (Token::Comma, 1),
                ('@', _) => (Token::At, 1),
                ('|', _) => (Token::Bar, 1),
                (':', _) => (Token::Colon, 1),
                ('.', _) => (Token::Dot, 1),
                ('+', _) => (Token::Plus, 1),
                ('-', _) => (Token::Minus, 1),
                ('>', _) => (Token::Gt, 1),
                ('=', _) => (Token::Eq, 1),
                _ => return Err(Diagnostic::error(here, format!("unexpected character `{c}`"))),
            };
            i += width;
            tok
        };
        col += i - start;
        out.push((token, here));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<Token> {
        lex(s).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn tokens() {
        assert_eq!(
            kinds("F(a)@T -o G@(T+2) # c\n T' >= 3.5 7/2"),
            vec![
                Token::Ident("F".into()),
                Token::LParen,
                Token::Ident("a".into()),
                Token::RParen,
                Token::At,
                Token::Ident("T".into()),
                Token::Lolli,
                Token::Ident("G".into()),
                Token::At,
                Token::LParen,
                Token::Ident("T".into()),
                Token::Plus,
                Token::Number("2".into()),
                Token::RParen,
                Token::Ident("T'".into()),
                Token::Ge,
                Token::Number("3.5".into()),
                Token::Number("7/2".into()),
            ]
        );
        assert_eq!(kinds("T -ok"), vec![Token::Ident("T".into()), Token::Minus, Token::Ident("ok".into())]);
        assert_eq!(kinds("N."), vec![Token::Ident("N".into()), Token::Dot]);
    }

    #[test]
    fn locations() {
        let toks = lex("init\n  { $").unwrap_err();
        assert_eq!(toks.location, Location { line: 2, column: 5 });
        let toks = lex("a\n  bc").unwrap();
        assert_eq!(toks[1].1, Location { line: 2, column: 3 });
    }
}
