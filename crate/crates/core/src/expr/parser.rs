use std::sync::Arc;

use super::ast::{BinaryOp, Constant, Expression, Function, Node};
use super::{check_coordinates, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(_) => "number".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(position: usize, expected: &[&str]) -> ParseError {
    ParseError::Syntax {
        position,
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let int_digits = j - i;
                let mut frac_digits = 0;
                if j < bytes.len() && bytes[j] == b'.' {
                    j += 1;
                    let f0 = j;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    frac_digits = j - f0;
                }
                if int_digits + frac_digits == 0 {
                    return Err(syntax(start, &["digit"]));
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    // Only an exponent if digits follow; otherwise `2e` is `2` then the constant e.
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    let d0 = k;
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k > d0 {
                        j = k;
                    }
                }
                let lit = &text[i..j];
                let v: f64 = lit.parse().map_err(|_| syntax(start, &["number"]))?;
                if !v.is_finite() {
                    return Err(syntax(start, &["finite number"]));
                }
                out.push((Tok::Num(v), start));
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push((Tok::Ident(text[i..j].to_string()), start));
                i = j;
                continue;
            }
            _ => {
                return Err(syntax(
                    start,
                    &["number", "identifier", "operator", "'('", "')'"],
                ))
            }
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    coords: &'a [String],
}

// Bounds on tree height and on nesting; evaluation and drop recurse over the
// tree. The fully parenthesized printout of a tree of height h nests at most
// 2h + 1 deep, so every accepted expression reparses.
const MAX_HEIGHT: usize = 128;
const MAX_DEPTH: usize = 2 * MAX_HEIGHT + 2;

fn grow(child_height: usize, at: usize) -> Result<usize, ParseError> {
    let h = child_height + 1;
    if h > MAX_HEIGHT {
        Err(syntax(at, &["a shorter expression"]))
    } else {
        Ok(h)
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), &[what]))
        }
    }

    fn expr(&mut self, depth: usize) -> Result<(Node, usize), ParseError> {
        if depth > MAX_DEPTH {
            return Err(syntax(self.offset(), &["shallower nesting"]));
        }
        let (mut lhs, mut h) = self.term(depth)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok((lhs, h)),
            };
            let at = self.offset();
            self.bump();
            let (rhs, rh) = self.term(depth)?;
            h = grow(h.max(rh), at)?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self, depth: usize) -> Result<(Node, usize), ParseError> {
        let (mut lhs, mut h) = self.unary(depth)?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok((lhs, h)),
            };
            let at = self.offset();
            self.bump();
            let (rhs, rh) = self.unary(depth)?;
            h = grow(h.max(rh), at)?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self, depth: usize) -> Result<(Node, usize), ParseError> {
        if *self.peek() == Tok::Minus {
            let at = self.offset();
            if depth > MAX_DEPTH {
                return Err(syntax(at, &["shallower nesting"]));
            }
            self.bump();
            let (inner, h) = self.unary(depth + 1)?;
            return Ok((Node::Neg(Box::new(inner)), grow(h, at)?));
        }
        self.power(depth)
    }

    fn power(&mut self, depth: usize) -> Result<(Node, usize), ParseError> {
        let (base, h) = self.atom(depth)?;
        if *self.peek() != Tok::Caret {
            return Ok((base, h));
        }
        self.bump();
        let exp_pos = self.offset();
        let exponent = self.exponent(exp_pos)?;
        if *self.peek() == Tok::Caret {
            // a^b^c would need a non-literal exponent b^c
            return Err(ParseError::NonLiteralExponent { position: exp_pos });
        }
        Ok((Node::Pow(Box::new(base), exponent), grow(h, exp_pos)?))
    }

    fn exponent(&mut self, exp_pos: usize) -> Result<f64, ParseError> {
        let parenthesized = *self.peek() == Tok::LParen;
        if parenthesized {
            self.bump();
        }
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let value = match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                v
            }
            Tok::End => return Err(syntax(self.offset(), &["number"])),
            Tok::Ident(_) | Tok::LParen | Tok::Minus => {
                return Err(ParseError::NonLiteralExponent { position: exp_pos })
            }
            _ => return Err(syntax(self.offset(), &["number"])),
        };
        if parenthesized {
            match self.peek() {
                Tok::RParen => {
                    self.bump();
                }
                Tok::End => return Err(syntax(self.offset(), &["')'"])),
                _ => return Err(ParseError::NonLiteralExponent { position: exp_pos }),
            }
        } else if matches!(self.peek(), Tok::LParen | Tok::Ident(_)) {
            return Err(ParseError::NonLiteralExponent { position: exp_pos });
        }
        Ok(if negative { -value } else { value })
    }

    fn atom(&mut self, depth: usize) -> Result<(Node, usize), ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok((Node::Number(v), 1))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr(depth + 1)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Function::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(syntax(self.offset(), &["'('"]));
                    }
                    self.bump();
                    let (arg, h) = self.expr(depth + 1)?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok((Node::Call(func, Box::new(arg)), grow(h, at)?));
                }
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    return Ok((Node::Coordinate(i), 1));
                }
                match name.as_str() {
                    "pi" => Ok((Node::Constant(Constant::Pi), 1)),
                    "e" => Ok((Node::Constant(Constant::E), 1)),
                    _ => Err(ParseError::UnknownIdentifier {
                        name,
                        position: at,
                    }),
                }
            }
            _ => Err(syntax(
                at,
                &["number", "identifier", "'('", "'-'"],
            )),
        }
    }
}

/// Parses `text` over the declared coordinate names.
///
/// Precedence, loosest first: `+ -`, `* /`, unary minus, `^`. Binary operators
/// associate to the left.
pub fn parse_expression<S: AsRef<str>>(text: &str, coords: &[S]) -> Result<Expression, ParseError> {
    check_coordinates(coords)?;
    let names: Arc<[String]> = coords.iter().map(|c| c.as_ref().to_string()).collect();
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        coords: &names,
    };
    let (root, _) = p.expr(0)?;
    if *p.peek() != Tok::End {
        let found = p.peek().describe();
        let mut expected = vec!["operator".to_string(), "end of input".to_string()];
        if matches!(p.peek(), Tok::RParen) {
            expected.push(format!("no {found}"));
        }
        return Err(ParseError::Syntax {
            position: p.offset(),
            expected,
        });
    }
    Ok(Expression::new(root, names))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Result<Expression, ParseError> {
        parse_expression(text, &["x1", "x2"])
    }

    #[test]
    fn zero_literal() {
        let e = parse_expression("0", &["x1"]).unwrap();
        assert_eq!(*e.root(), Node::Number(0.0));
    }

    #[test]
    fn product_of_sin_and_square() {
        let e = p("sin(x1)*x2^2").unwrap();
        let want = Node::Binary(
            BinaryOp::Mul,
            Box::new(Node::Call(Function::Sin, Box::new(Node::Coordinate(0)))),
            Box::new(Node::Pow(Box::new(Node::Coordinate(1)), 2.0)),
        );
        assert_eq!(*e.root(), want);
    }

    #[test]
    fn dangling_operator_reports_position() {
        match p("x1 + * x2") {
            Err(ParseError::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        // -x1^2 is -(x1^2)
        let e = p("-x1^2").unwrap();
        assert_eq!(
            *e.root(),
            Node::Neg(Box::new(Node::Pow(Box::new(Node::Coordinate(0)), 2.0)))
        );
        // left associative subtraction
        let e = p("x1 - x2 - 1").unwrap();
        match e.root() {
            Node::Binary(BinaryOp::Sub, lhs, rhs) => {
                assert!(matches!(**lhs, Node::Binary(BinaryOp::Sub, _, _)));
                assert_eq!(**rhs, Node::Number(1.0));
            }
            other => panic!("unexpected {other:?}"),
        }
        // * binds tighter than +
        let e = p("1 + x1 * x2").unwrap();
        assert!(matches!(e.root(), Node::Binary(BinaryOp::Add, _, _)));
    }

    #[test]
    fn exponent_forms() {
        assert_eq!(
            *p("x1^-2").unwrap().root(),
            Node::Pow(Box::new(Node::Coordinate(0)), -2.0)
        );
        assert_eq!(
            *p("x1^(-0.5)").unwrap().root(),
            Node::Pow(Box::new(Node::Coordinate(0)), -0.5)
        );
        assert!(matches!(
            p("x1^x2"),
            Err(ParseError::NonLiteralExponent { position: 3 })
        ));
        assert!(matches!(p("2^3^2"), Err(ParseError::NonLiteralExponent { .. })));
        assert!(matches!(p("x1^(1+1)"), Err(ParseError::NonLiteralExponent { .. })));
        assert!(matches!(p("x1^2(x2)"), Err(ParseError::NonLiteralExponent { .. })));
    }

    #[test]
    fn identifiers() {
        assert!(matches!(
            p("x3 + 1"),
            Err(ParseError::UnknownIdentifier { ref name, position: 0 }) if name == "x3"
        ));
        assert_eq!(*p("pi").unwrap().root(), Node::Constant(Constant::Pi));
        assert_eq!(*p("e").unwrap().root(), Node::Constant(Constant::E));
        // `sin` without a call is a syntax error, not an identifier
        assert!(matches!(p("sin + 1"), Err(ParseError::Syntax { position: 4, .. })));
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(*p("1.5e-3").unwrap().root(), Node::Number(1.5e-3));
        assert_eq!(*p(".25").unwrap().root(), Node::Number(0.25));
        // juxtaposition is not multiplication
        assert!(p("2e").is_err());
        assert!(p("1e999").is_err());
    }

    #[test]
    fn unbalanced_and_trailing() {
        assert!(matches!(p("(x1"), Err(ParseError::Syntax { position: 3, .. })));
        assert!(matches!(p("x1)"), Err(ParseError::Syntax { position: 2, .. })));
        assert!(matches!(p(""), Err(ParseError::Syntax { position: 0, .. })));
        assert!(matches!(p("x1 $"), Err(ParseError::Syntax { position: 3, .. })));
    }

    #[test]
    fn coordinate_list_is_checked() {
        let none: [&str; 0] = [];
        assert!(matches!(
            parse_expression("1", &none),
            Err(ParseError::InvalidCoordinates(_))
        ));
        assert!(parse_expression("1", &["x", "x"]).is_err());
        assert!(parse_expression("1", &["pi"]).is_err());
        assert!(parse_expression("1", &["1x"]).is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = "(".repeat(10_000) + "x1" + &")".repeat(10_000);
        assert!(p(&text).is_err());
        let text = "-".repeat(10_000) + "x1";
        assert!(p(&text).is_err());
        let text = vec!["x1"; 5_000].join(" + ");
        assert!(p(&text).is_err());
    }

    #[test]
    fn tallest_accepted_trees_reparse_from_display() {
        let builders: [fn(usize) -> String; 3] = [
            |k| "-".repeat(k) + "x1",
            |k| vec!["x1"; k].join(" + "),
            |k| "sin(".repeat(k) + "x1" + &")".repeat(k),
        ];
        for build in builders {
            let k = (1..1000).take_while(|&k| p(&build(k)).is_ok()).last().unwrap();
            assert!(k >= 100, "limit reached at {k}");
            let e = p(&build(k)).unwrap();
            let again = p(&e.to_string()).unwrap();
            assert_eq!(again.root(), e.root());
        }
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "sin(x1)*x2^2",
            "-x1^2 + (x1 - x2)/3",
            "(x1^2)^3",
            "(-x1)^(-1.5) * e - pi",
            "sqrt(1 + x1^2) / tanh(x2)",
            "0.0000001 * x1",
        ] {
            let e = p(src).unwrap();
            let printed = e.to_string();
            let again = p(&printed).unwrap();
            assert_eq!(e, again, "{src} -> {printed}");
        }
    }
}
