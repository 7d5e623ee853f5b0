use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Cmp(super::CmpOp),
    /// `=` is both assignment and equality; the parser decides.
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Newline,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    use super::CmpOp::*;
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut depth = 0i32;
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: start_line, col: start_col });
        let syntax = |message: String| ParseError::Syntax { line: start_line, col: start_col, message };
        match c {
            '\n' => {
                // newlines inside parentheses continue the binding
                if depth == 0 {
                    push(&mut out, Tok::Newline);
                }
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => {
                depth += 1;
                push(&mut out, Tok::LParen)
            }
            ')' => {
                depth -= 1;
                push(&mut out, Tok::RParen)
            }
            ',' => push(&mut out, Tok::Comma),
            '+' => push(&mut out, Tok::Plus),
            '-' => push(&mut out, Tok::Minus),
            '*' => push(&mut out, Tok::Star),
            '/' => push(&mut out, Tok::Slash),
            '=' => push(&mut out, Tok::Assign),
            '<' | '>' | '!' => {
                let next = chars.get(i + 1).copied();
                let (tok, len) = match (c, next) {
                    ('<', Some('=')) => (Tok::Cmp(Le), 2),
                    ('<', Some('>')) => (Tok::Cmp(Ne), 2),
                    ('>', Some('=')) => (Tok::Cmp(Ge), 2),
                    ('!', Some('=')) => (Tok::Cmp(Ne), 2),
                    ('<', _) => (Tok::Cmp(Lt), 1),
                    ('>', _) => (Tok::Cmp(Gt), 1),
                    _ => return Err(syntax("unexpected `!`".into())),
                };
                push(&mut out, tok);
                i += len;
                col += len;
                continue;
            }
            '\'' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None | Some('\n') => return Err(syntax("unterminated string literal".into())),
                        Some('\'') if chars.get(j + 1) == Some(&'\'') => {
                            s.push('\'');
                            j += 2;
                        }
                        Some('\'') => break,
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                push(&mut out, Tok::Str(s));
                col += j + 1 - i;
                i = j + 1;
                continue;
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let n: f64 = text.parse().map_err(|_| syntax(format!("bad number `{text}`")))?;
                push(&mut out, Tok::Num(n));
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '.') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                push(&mut out, Tok::Ident(text));
                col += j - i;
                i = j;
                continue;
            }
            other => return Err(syntax(format!("unexpected character `{other}`"))),
        }
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::Newline, line, col });
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
