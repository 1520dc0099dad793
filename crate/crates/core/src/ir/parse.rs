//! Line-oriented parser for `.tir` files.
//!
//! One instruction per line; `#` starts a comment. Classes referenced but not
//! defined become phantom entries. Validation covers duplicate names, label
//! integrity and textual use-before-def (branch feasibility ignored).

use std::collections::{BTreeMap, BTreeSet};

use super::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{file}:{line}:{col}: {msg}")]
pub struct ParseError {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_named(text, "<input>")
}

pub fn parse_program_named(text: &str, file: &str) -> Result<Program, ParseError> {
    let mut parser = Parser {
        file: file.to_string(),
        classes: BTreeMap::new(),
    };
    parser.run(text)?;
    parser.finish()
}

struct Parser {
    file: String,
    classes: BTreeMap<QName, ClassDef>,
}

/// What the parser is in the middle of.
enum State {
    TopLevel,
    InClass(ClassDef),
    InMethod(ClassDef, MethodHeader, Vec<(u32, BodyLine)>),
}

struct MethodHeader {
    sig_ret: String,
    name: String,
    params: Vec<String>,
}

enum BodyLine {
    ParamBind { local: String, index: usize },
    Instr(Op),
}

impl Parser {
    fn run(&mut self, text: &str) -> Result<(), ParseError> {
        let file = self.file.clone();
        let mut state = State::TopLevel;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = (idx + 1) as u32;
            let mut cur = Cursor::new(raw, &file, lineno);
            cur.skip_ws();
            if cur.at_end() {
                continue;
            }
            state = self.step(state, &mut cur, lineno)?;
            let mut check = cur;
            check.skip_ws();
            if !check.at_end() {
                return Err(check.err("trailing input after instruction"));
            }
        }
        match state {
            State::TopLevel => Ok(()),
            State::InClass(c) => Err(ParseError {
                file: self.file.clone(),
                line: 0,
                col: 0,
                msg: format!("unterminated class `{}` (missing `}}`)", c.name),
            }),
            State::InMethod(c, h, _) => Err(ParseError {
                file: self.file.clone(),
                line: 0,
                col: 0,
                msg: format!("unterminated method `{}` in class `{}`", h.name, c.name),
            }),
        }
    }

    fn step(&mut self, state: State, cur: &mut Cursor, lineno: u32) -> Result<State, ParseError> {
        match state {
            State::TopLevel => {
                cur.expect_word("class")?;
                let name = cur.parse_qname()?;
                let mut superclass = None;
                let mut interfaces = Vec::new();
                if cur.try_word("extends") {
                    superclass = Some(cur.parse_qname()?);
                }
                if cur.try_word("implements") {
                    loop {
                        interfaces.push(cur.parse_qname()?);
                        if !cur.try_punct(",") {
                            break;
                        }
                    }
                }
                cur.expect_punct("{")?;
                if self.classes.get(&name).map(|c| !c.is_phantom).unwrap_or(false) {
                    return Err(cur.err(&format!("duplicate class name `{name}`")));
                }
                Ok(State::InClass(ClassDef {
                    name,
                    superclass,
                    interfaces,
                    fields: Vec::new(),
                    methods: Vec::new(),
                    is_phantom: false,
                    file: self.file.clone(),
                }))
            }
            State::InClass(mut class) => {
                if cur.try_punct("}") {
                    self.classes.insert(class.name.clone(), class);
                    return Ok(State::TopLevel);
                }
                let is_static = cur.try_word("static");
                if cur.try_word("field") {
                    let ty = cur.parse_type()?;
                    let name = cur.parse_ident()?;
                    if class.fields.iter().any(|f| f.name == name) {
                        return Err(cur.err(&format!("duplicate field `{name}` in `{}`", class.name)));
                    }
                    class.fields.push(FieldDef { name, declared_type: ty, is_static });
                    return Ok(State::InClass(class));
                }
                if is_static {
                    return Err(cur.err("`static` is only valid before `field`"));
                }
                cur.expect_word("method")?;
                let ret = cur.parse_type()?;
                let name = cur.parse_method_name()?;
                cur.expect_punct("(")?;
                let mut params = Vec::new();
                if !cur.peek_punct(")") {
                    loop {
                        params.push(cur.parse_type()?);
                        if !cur.try_punct(",") {
                            break;
                        }
                    }
                }
                cur.expect_punct(")")?;
                cur.expect_punct("{")?;
                let header = MethodHeader { sig_ret: ret, name, params };
                Ok(State::InMethod(class, header, Vec::new()))
            }
            State::InMethod(mut class, header, mut body) => {
                if cur.try_punct("}") {
                    let method = self.finish_method(&class, header, body, cur)?;
                    if class.methods.iter().any(|m| m.sig == method.sig) {
                        return Err(cur.err(&format!(
                            "duplicate method signature `{}` in `{}`",
                            method.sig, class.name
                        )));
                    }
                    class.methods.push(method);
                    return Ok(State::InClass(class));
                }
                let line = parse_body_line(cur)?;
                body.push((lineno, line));
                Ok(State::InMethod(class, header, body))
            }
        }
    }

    fn finish_method(
        &self,
        class: &ClassDef,
        header: MethodHeader,
        body: Vec<(u32, BodyLine)>,
        cur: &Cursor,
    ) -> Result<MethodDef, ParseError> {
        let sig = MethodSig {
            owner: class.name.clone(),
            name: header.name,
            params: header.params,
            ret: header.sig_ret,
        };
        let mut param_locals: Vec<String> = Vec::new();
        let mut instrs: Vec<Instruction> = Vec::new();
        for (line, item) in body {
            match item {
                BodyLine::ParamBind { local, index } => {
                    if !instrs.is_empty() {
                        return Err(line_err(cur, line, "param bindings must precede instructions"));
                    }
                    if index != param_locals.len() {
                        return Err(line_err(cur, line, "param bindings must be dense from 0"));
                    }
                    if index >= sig.params.len() {
                        return Err(line_err(cur, line, "param index exceeds declared parameter count"));
                    }
                    param_locals.push(local);
                }
                BodyLine::Instr(op) => instrs.push(Instruction { line, op }),
            }
        }
        validate_method(&sig, &param_locals, &instrs, cur)?;
        Ok(MethodDef { sig, param_locals, body: Some(instrs) })
    }

    fn finish(mut self) -> Result<Program, ParseError> {
        // Materialize phantom classes for every referenced-but-undefined name.
        let mut referenced: BTreeSet<QName> = BTreeSet::new();
        for class in self.classes.values() {
            if let Some(s) = &class.superclass {
                referenced.insert(s.clone());
            }
            referenced.extend(class.interfaces.iter().cloned());
            for method in &class.methods {
                for instr in method.body() {
                    match &instr.op {
                        Op::Invoke(inv) => {
                            referenced.insert(inv.callee.owner.clone());
                        }
                        Op::Assign { target, rhs } => {
                            if let LValue::Field(FieldRef { base: FieldBase::StaticOwner(o), .. }) = target {
                                referenced.insert(o.clone());
                            }
                            if let Rhs::Field(FieldRef { base: FieldBase::StaticOwner(o), .. }) = rhs {
                                referenced.insert(o.clone());
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
        for name in referenced {
            self.classes.entry(name.clone()).or_insert_with(|| ClassDef {
                name,
                superclass: None,
                interfaces: Vec::new(),
                fields: Vec::new(),
                methods: Vec::new(),
                is_phantom: true,
                file: self.file.clone(),
            });
        }
        Ok(Program { classes: self.classes })
    }
}

fn line_err(cur: &Cursor, line: u32, msg: &str) -> ParseError {
    ParseError { file: cur.file.to_string(), line, col: 1, msg: msg.to_string() }
}

fn parse_body_line(cur: &mut Cursor) -> Result<BodyLine, ParseError> {
    // Keyword-led statements first.
    if cur.try_word("if") {
        let left = cur.parse_value()?;
        let cmp = cur.parse_cmp()?;
        let right = cur.parse_value()?;
        cur.expect_word("goto")?;
        let label = cur.parse_ident()?;
        return Ok(BodyLine::Instr(Op::If { left, cmp, right, label }));
    }
    if cur.try_word("goto") {
        let label = cur.parse_ident()?;
        return Ok(BodyLine::Instr(Op::Goto(label)));
    }
    if cur.try_word("return") {
        cur.skip_ws();
        if cur.at_end() {
            return Ok(BodyLine::Instr(Op::Return(None)));
        }
        let v = cur.parse_value()?;
        return Ok(BodyLine::Instr(Op::Return(Some(v))));
    }
    if cur.try_word("throw") {
        let v = cur.parse_value()?;
        return Ok(BodyLine::Instr(Op::Throw(v)));
    }
    for kind in [InvokeKind::Static, InvokeKind::Special, InvokeKind::Interface, InvokeKind::Virtual] {
        if cur.try_word(kind.keyword()) {
            let inv = parse_invoke_tail(cur, kind, None)?;
            return Ok(BodyLine::Instr(Op::Invoke(inv)));
        }
    }
    // `<Owner>.<field> = value` static field store.
    if cur.peek_punct("<") {
        let field = cur.parse_static_field_ref()?;
        cur.expect_punct("=")?;
        let v = cur.parse_value()?;
        return Ok(BodyLine::Instr(Op::Assign {
            target: LValue::Field(field),
            rhs: Rhs::Value(v),
        }));
    }

    let ident = cur.parse_ident()?;
    // Label definition: `L1:` alone (but not `x := param`).
    if cur.peek_punct(":") && !cur.peek_punct(":=") {
        cur.expect_punct(":")?;
        return Ok(BodyLine::Instr(Op::Label(ident)));
    }
    if cur.try_punct(":=") {
        cur.expect_word("param")?;
        let index = cur.parse_usize()?;
        return Ok(BodyLine::ParamBind { local: ident, index });
    }
    if cur.try_punct("[") {
        let index = cur.parse_value()?;
        cur.expect_punct("]")?;
        cur.expect_punct("=")?;
        let v = cur.parse_value()?;
        return Ok(BodyLine::Instr(Op::Assign {
            target: LValue::Array { base: ident, index },
            rhs: Rhs::Value(v),
        }));
    }
    if cur.try_punct(".") {
        // Target-less virtual invoke (`r3.<sig>(args)`) or instance field store.
        return parse_after_dot(cur, ident, None);
    }
    cur.expect_punct("=")?;
    parse_assign_rhs(cur, ident)
}

/// After `target =`: invoke forms, newarray, loads, or a plain value.
fn parse_assign_rhs(cur: &mut Cursor, target: String) -> Result<BodyLine, ParseError> {
    for kind in [InvokeKind::Static, InvokeKind::Special, InvokeKind::Interface, InvokeKind::Virtual] {
        if cur.try_word(kind.keyword()) {
            let inv = parse_invoke_tail(cur, kind, Some(target))?;
            return Ok(BodyLine::Instr(Op::Invoke(inv)));
        }
    }
    if cur.try_word("newarray") {
        let elem = cur.parse_qname()?;
        cur.expect_punct("[")?;
        let size = cur.parse_value()?;
        cur.expect_punct("]")?;
        return Ok(BodyLine::Instr(Op::NewArray { target, elem_type: elem, size }));
    }
    if cur.peek_punct("<") {
        let field = cur.parse_static_field_ref()?;
        return Ok(BodyLine::Instr(Op::Assign {
            target: LValue::Local(target),
            rhs: Rhs::Field(field),
        }));
    }
    // Base-led forms: `r3.<...>` (invoke or field read) and `r3[i]`.
    let save = *cur;
    if let Ok(ident) = cur.parse_ident_or_this() {
        if cur.try_punct(".") {
            return parse_after_dot(cur, ident, Some(target));
        }
        if cur.try_punct("[") {
            let index = cur.parse_value()?;
            cur.expect_punct("]")?;
            return Ok(BodyLine::Instr(Op::Assign {
                target: LValue::Local(target),
                rhs: Rhs::ArrayLoad { base: ident, index },
            }));
        }
        *cur = save;
    }
    let v = cur.parse_value()?;
    Ok(BodyLine::Instr(Op::Assign { target: LValue::Local(target), rhs: Rhs::Value(v) }))
}

/// After `base.`: either `<sig>(args)` (virtual invoke) or `<field>` access.
fn parse_after_dot(cur: &mut Cursor, base: String, target: Option<String>) -> Result<BodyLine, ParseError> {
    let save = *cur;
    cur.expect_punct("<")?;
    if cur.looks_like_signature() {
        *cur = save;
        let inv = parse_invoke_tail_with_base(cur, InvokeKind::Virtual, Some(base), target)?;
        return Ok(BodyLine::Instr(Op::Invoke(inv)));
    }
    let name = cur.parse_ident()?;
    cur.expect_punct(">")?;
    let field_base = if base == "this" { FieldBase::This } else { FieldBase::Local(base) };
    let field = FieldRef { base: field_base, name };
    match target {
        Some(t) => Ok(BodyLine::Instr(Op::Assign {
            target: LValue::Local(t),
            rhs: Rhs::Field(field),
        })),
        None => {
            cur.expect_punct("=")?;
            let v = cur.parse_value()?;
            Ok(BodyLine::Instr(Op::Assign { target: LValue::Field(field), rhs: Rhs::Value(v) }))
        }
    }
}

/// Invoke after the kind keyword: `[base.]<sig>(args)`.
fn parse_invoke_tail(cur: &mut Cursor, kind: InvokeKind, target: Option<String>) -> Result<InvokeOp, ParseError> {
    let base = if kind == InvokeKind::Static {
        None
    } else {
        let b = cur.parse_ident_or_this()?;
        cur.expect_punct(".")?;
        Some(b)
    };
    parse_invoke_tail_with_base(cur, kind, base, target)
}

fn parse_invoke_tail_with_base(
    cur: &mut Cursor,
    kind: InvokeKind,
    base: Option<String>,
    target: Option<String>,
) -> Result<InvokeOp, ParseError> {
    let callee = cur.parse_signature()?;
    cur.expect_punct("(")?;
    let mut args = Vec::new();
    if !cur.peek_punct(")") {
        loop {
            args.push(cur.parse_value()?);
            if !cur.try_punct(",") {
                break;
            }
        }
    }
    cur.expect_punct(")")?;
    Ok(InvokeOp { kind, base, callee, args, assign_target: target })
}

fn validate_method(
    sig: &MethodSig,
    param_locals: &[String],
    body: &[Instruction],
    cur: &Cursor,
) -> Result<(), ParseError> {
    // Labels: defined exactly once, every branch target exists.
    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    for instr in body {
        if let Op::Label(name) = &instr.op {
            if labels.insert(name, 1).is_some() {
                return Err(line_err(cur, instr.line, &format!("label `{name}` defined twice in `{sig}`")));
            }
        }
    }
    for instr in body {
        let target = match &instr.op {
            Op::If { label, .. } | Op::Goto(label) => Some(label),
            _ => None,
        };
        if let Some(label) = target {
            if !labels.contains_key(label.as_str()) {
                return Err(line_err(cur, instr.line, &format!("undefined label `{label}` in `{sig}`")));
            }
        }
    }
    // Use-before-def on locals, in textual order; `this` is implicit.
    let mut defined: BTreeSet<&str> = param_locals.iter().map(|s| s.as_str()).collect();
    defined.insert("this");
    for instr in body {
        let check = |v: &Value| -> Result<(), ParseError> {
            if let Some(local) = v.as_local() {
                if !defined.contains(local) {
                    return Err(line_err(
                        cur,
                        instr.line,
                        &format!("use of `{local}` before definition in `{sig}`"),
                    ));
                }
            }
            Ok(())
        };
        match &instr.op {
            Op::Assign { target, rhs } => {
                match rhs {
                    Rhs::Value(v) => check(v)?,
                    Rhs::ArrayLoad { base, index } => {
                        check(&Value::Local(base.clone()))?;
                        check(index)?;
                    }
                    Rhs::Field(f) => {
                        if let FieldBase::Local(b) = &f.base {
                            check(&Value::Local(b.clone()))?;
                        }
                    }
                }
                match target {
                    LValue::Local(t) => {
                        defined.insert(t);
                    }
                    LValue::Array { base, index } => {
                        check(&Value::Local(base.clone()))?;
                        check(index)?;
                    }
                    LValue::Field(f) => {
                        if let FieldBase::Local(b) = &f.base {
                            check(&Value::Local(b.clone()))?;
                        }
                    }
                }
            }
            Op::Invoke(inv) => {
                for a in &inv.args {
                    check(a)?;
                }
                if let Some(base) = &inv.base {
                    // A constructor call introduces its receiver local.
                    if inv.kind == InvokeKind::Special && inv.callee.name == "<init>" {
                        defined.insert(base);
                    } else {
                        check(&Value::Local(base.clone()))?;
                    }
                }
                if let Some(t) = &inv.assign_target {
                    defined.insert(t);
                }
            }
            Op::NewArray { target, size, .. } => {
                check(size)?;
                defined.insert(target);
            }
            Op::Return(Some(v)) | Op::Throw(v) => check(v)?,
            Op::If { left, right, .. } => {
                check(left)?;
                check(right)?;
            }
            Op::Return(None) | Op::Goto(_) | Op::Label(_) => {}
        }
    }
    // Static invokes carry no receiver by construction of the grammar.
    for instr in body {
        if let Op::Invoke(inv) = &instr.op {
            if inv.kind == InvokeKind::Static && inv.base.is_some() {
                return Err(line_err(cur, instr.line, "staticinvoke must not have a receiver"));
            }
            if inv.kind != InvokeKind::Static && inv.base.is_none() {
                return Err(line_err(cur, instr.line, "non-static invoke requires a receiver"));
            }
        }
    }
    Ok(())
}

/// Character cursor over a single line.
#[derive(Clone, Copy)]
struct Cursor<'a> {
    line: &'a str,
    pos: usize,
    file: &'a str,
    lineno: u32,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a str, file: &'a str, lineno: u32) -> Self {
        Cursor { line, pos: 0, file, lineno }
    }

    fn rest(&self) -> &'a str {
        &self.line[self.pos..]
    }

    fn skip_ws(&mut self) {
        loop {
            let rest = self.rest();
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if self.rest().starts_with('#') {
                self.pos = self.line.len();
            } else {
                break;
            }
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.line.len()
    }

    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            file: self.file.to_string(),
            line: self.lineno,
            col: (self.pos + 1) as u32,
            msg: msg.to_string(),
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn try_word(&mut self, word: &str) -> bool {
        self.skip_ws();
        let rest = self.rest();
        if let Some(after) = rest.strip_prefix(word) {
            if after.chars().next().map(|c| !is_ident_char(c)).unwrap_or(true) {
                self.pos += word.len();
                return true;
            }
        }
        false
    }

    fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        if self.try_word(word) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{word}`")))
        }
    }

    fn peek_punct(&mut self, p: &str) -> bool {
        self.skip_ws();
        self.rest().starts_with(p)
    }

    fn try_punct(&mut self, p: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(p) {
            self.pos += p.len();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.try_punct(p) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{p}`")))
        }
    }

    fn parse_ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest.find(|c: char| !is_ident_char(c)).unwrap_or(rest.len());
        if end == 0 || rest.chars().next().map(|c| c.is_ascii_digit()).unwrap_or(true) {
            return Err(self.err("expected identifier"));
        }
        self.pos += end;
        Ok(rest[..end].to_string())
    }

    fn parse_ident_or_this(&mut self) -> Result<String, ParseError> {
        self.parse_ident()
    }

    /// Dotted qualified name, also used for type base names.
    fn parse_qname(&mut self) -> Result<String, ParseError> {
        let mut name = self.parse_ident()?;
        while self.rest().starts_with('.') {
            // Only continue if an identifier follows the dot (not `.<`).
            let next = self.line[self.pos + 1..].chars().next();
            match next {
                Some(c) if is_ident_start(c) => {
                    self.pos += 1;
                    name.push('.');
                    name.push_str(&self.parse_ident()?);
                }
                _ => break,
            }
        }
        Ok(name)
    }

    /// Type name: qualified name plus optional `[]` suffix.
    fn parse_type(&mut self) -> Result<String, ParseError> {
        let mut t = self.parse_qname()?;
        while self.rest().starts_with("[]") {
            self.pos += 2;
            t.push_str("[]");
        }
        Ok(t)
    }

    fn parse_method_name(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        if self.rest().starts_with("<init>") {
            self.pos += "<init>".len();
            return Ok("<init>".to_string());
        }
        self.parse_ident()
    }

    fn parse_usize(&mut self) -> Result<usize, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if end == 0 {
            return Err(self.err("expected number"));
        }
        let n = rest[..end].parse().map_err(|_| self.err("number out of range"))?;
        self.pos += end;
        Ok(n)
    }

    fn parse_cmp(&mut self) -> Result<Cmp, ParseError> {
        self.skip_ws();
        for (sym, cmp) in [
            ("==", Cmp::Eq),
            ("!=", Cmp::Ne),
            ("<=", Cmp::Le),
            (">=", Cmp::Ge),
            ("<", Cmp::Lt),
            (">", Cmp::Gt),
        ] {
            if self.try_punct(sym) {
                return Ok(cmp);
            }
        }
        Err(self.err("expected comparison operator"))
    }

    fn parse_value(&mut self) -> Result<Value, ParseError> {
        self.skip_ws();
        match self.peek_char() {
            Some('"') => {
                self.pos += 1;
                let mut s = String::new();
                loop {
                    match self.peek_char() {
                        Some('"') => {
                            self.pos += 1;
                            return Ok(Value::ConstString(s));
                        }
                        Some('\\') => {
                            self.pos += 1;
                            match self.peek_char() {
                                Some('"') => {
                                    s.push('"');
                                    self.pos += 1;
                                }
                                Some('\\') => {
                                    s.push('\\');
                                    self.pos += 1;
                                }
                                _ => return Err(self.err("invalid escape (only \\\" and \\\\)")),
                            }
                        }
                        Some(c) => {
                            s.push(c);
                            self.pos += c.len_utf8();
                        }
                        None => return Err(self.err("unterminated string literal")),
                    }
                }
            }
            Some('\'') => {
                self.pos += 1;
                let c = self.peek_char().ok_or_else(|| self.err("unterminated char literal"))?;
                self.pos += c.len_utf8();
                if self.peek_char() != Some('\'') {
                    return Err(self.err("unterminated char literal"));
                }
                self.pos += 1;
                Ok(Value::ConstChar(c))
            }
            Some(c) if c.is_ascii_digit() || c == '-' => {
                let rest = self.rest();
                let sign = if c == '-' { 1 } else { 0 };
                let end = sign
                    + rest[sign..]
                        .find(|c: char| !c.is_ascii_digit())
                        .unwrap_or(rest.len() - sign);
                if end == sign {
                    return Err(self.err("expected number"));
                }
                let n: i64 = rest[..end].parse().map_err(|_| self.err("number out of range"))?;
                self.pos += end;
                if self.rest().starts_with('L') {
                    self.pos += 1;
                    Ok(Value::ConstLong(n))
                } else {
                    Ok(Value::ConstInt(n))
                }
            }
            _ => {
                let ident = self.parse_ident()?;
                Ok(match ident.as_str() {
                    "true" => Value::ConstBool(true),
                    "false" => Value::ConstBool(false),
                    "null" => Value::ConstNull,
                    "this" => Value::This,
                    _ => Value::Local(ident),
                })
            }
        }
    }

    /// Inside an already-consumed `<`: does a `:` precede the closing `>` of
    /// this bracket? Signatures contain one, field names do not.
    fn looks_like_signature(&self) -> bool {
        let mut depth = 1;
        for c in self.rest().chars() {
            match c {
                '<' => depth += 1,
                '>' => {
                    depth -= 1;
                    if depth == 0 {
                        return false;
                    }
                }
                ':' => return true,
                _ => {}
            }
        }
        false
    }

    /// `<owner: ret name(p1,p2)>`; the name may itself be `<init>`.
    fn parse_signature(&mut self) -> Result<MethodSig, ParseError> {
        self.expect_punct("<")?;
        let owner = self.parse_qname()?;
        self.expect_punct(":")?;
        let ret = self.parse_type()?;
        let name = self.parse_method_name()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.peek_punct(")") {
            loop {
                params.push(self.parse_type()?);
                if !self.try_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        self.expect_punct(">")?;
        Ok(MethodSig { owner, name, params, ret })
    }

    /// `<Owner>.<field>` static field reference.
    fn parse_static_field_ref(&mut self) -> Result<FieldRef, ParseError> {
        self.expect_punct("<")?;
        let owner = self.parse_qname()?;
        self.expect_punct(">")?;
        self.expect_punct(".")?;
        self.expect_punct("<")?;
        let name = self.parse_ident()?;
        self.expect_punct(">")?;
        Ok(FieldRef { base: FieldBase::StaticOwner(owner), name })
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit()
}
