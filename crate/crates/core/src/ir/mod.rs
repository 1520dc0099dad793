//! Program model for the textual three-address IR (TIR).
//!
//! A [`Program`] is a set of classes; classes referenced by invokes,
//! `extends` or `implements` but never defined are materialized as phantom
//! classes (no method bodies). All analyses read this model immutably.

use std::collections::BTreeMap;
use std::fmt;

mod defuse;
mod parse;
mod render;

pub use defuse::{def_use_graph, reachable_instructions, Cell, DefSite, DefUseError, Reaching};
pub(crate) use defuse::{compute_reaching as compute_reaching_for, field_cell as field_cell_for};
pub use parse::{parse_program, parse_program_named, ParseError};
pub use render::{render_program, structural_eq};

/// Fully qualified class name, e.g. `javax.crypto.Cipher`.
pub type QName = String;

/// Method signature: owner class, name, parameter types and return type.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodSig {
    pub owner: QName,
    pub name: String,
    pub params: Vec<String>,
    pub ret: String,
}

impl MethodSig {
    pub fn new(owner: &str, ret: &str, name: &str, params: &[&str]) -> Self {
        MethodSig {
            owner: owner.to_string(),
            name: name.to_string(),
            params: params.iter().map(|p| p.to_string()).collect(),
            ret: ret.to_string(),
        }
    }

    /// `<owner: ret name(p1,p2)>` — the form used inside invoke instructions.
    pub fn jvm_style(&self) -> String {
        format!("<{}: {} {}({})>", self.owner, self.ret, self.name, self.params.join(","))
    }
}

impl fmt::Display for MethodSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}({})", self.owner, self.name, self.params.join(","))
    }
}

impl fmt::Debug for MethodSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.jvm_style())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub classes: BTreeMap<QName, ClassDef>,
}

#[derive(Clone, Debug)]
pub struct ClassDef {
    pub name: QName,
    pub superclass: Option<QName>,
    pub interfaces: Vec<QName>,
    pub fields: Vec<FieldDef>,
    pub methods: Vec<MethodDef>,
    pub is_phantom: bool,
    /// Origin file label; finding locations are line numbers within this file.
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub declared_type: String,
    pub is_static: bool,
}

#[derive(Clone, Debug)]
pub struct MethodDef {
    pub sig: MethodSig,
    /// Local names bound to parameters, in parameter order (`rX := param K`).
    pub param_locals: Vec<String>,
    /// None for phantom methods.
    pub body: Option<Vec<Instruction>>,
}

impl MethodDef {
    pub fn body(&self) -> &[Instruction] {
        self.body.as_deref().unwrap_or(&[])
    }

    /// Parameter index bound to `local`, if any.
    pub fn param_index(&self, local: &str) -> Option<usize> {
        self.param_locals.iter().position(|p| p == local)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instruction {
    /// 1-based line index within the origin file.
    pub line: u32,
    pub op: Op,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Assign { target: LValue, rhs: Rhs },
    Invoke(InvokeOp),
    NewArray { target: String, elem_type: String, size: Value },
    Return(Option<Value>),
    Throw(Value),
    If { left: Value, cmp: Cmp, right: Value, label: String },
    Goto(String),
    Label(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LValue {
    Local(String),
    Field(FieldRef),
    Array { base: String, index: Value },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Value(Value),
    Field(FieldRef),
    ArrayLoad { base: String, index: Value },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldRef {
    pub base: FieldBase,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FieldBase {
    This,
    Local(String),
    StaticOwner(QName),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvokeOp {
    pub kind: InvokeKind,
    /// Receiver local (or `this`); None for static invokes.
    pub base: Option<String>,
    pub callee: MethodSig,
    pub args: Vec<Value>,
    pub assign_target: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InvokeKind {
    Static,
    Virtual,
    Special,
    Interface,
}

impl InvokeKind {
    pub fn keyword(self) -> &'static str {
        match self {
            InvokeKind::Static => "staticinvoke",
            InvokeKind::Virtual => "virtualinvoke",
            InvokeKind::Special => "specialinvoke",
            InvokeKind::Interface => "interfaceinvoke",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Local(String),
    This,
    ConstString(String),
    ConstInt(i64),
    ConstLong(i64),
    ConstBool(bool),
    ConstChar(char),
    ConstNull,
}

impl Value {
    pub fn is_const(&self) -> bool {
        !matches!(self, Value::Local(_) | Value::This)
    }

    pub fn as_local(&self) -> Option<&str> {
        match self {
            Value::Local(name) => Some(name),
            Value::This => Some("this"),
            _ => None,
        }
    }

    /// Evidence text for reports: the constant rendered without quotes.
    pub fn display_text(&self) -> String {
        match self {
            Value::ConstString(s) => s.clone(),
            Value::ConstInt(i) => i.to_string(),
            Value::ConstLong(i) => i.to_string(),
            Value::ConstBool(b) => b.to_string(),
            Value::ConstChar(c) => c.to_string(),
            Value::ConstNull => "null".to_string(),
            Value::Local(name) => name.clone(),
            Value::This => "this".to_string(),
        }
    }
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.get(name)
    }

    /// Look up a concrete (non-phantom) method definition by exact signature.
    pub fn method(&self, sig: &MethodSig) -> Option<&MethodDef> {
        self.classes
            .get(&sig.owner)
            .and_then(|c| c.methods.iter().find(|m| &m.sig == sig))
    }

    /// Methods of all non-phantom classes, in stable order.
    pub fn all_methods(&self) -> impl Iterator<Item = (&ClassDef, &MethodDef)> {
        self.classes.values().flat_map(|c| c.methods.iter().map(move |m| (c, m)))
    }

    /// Direct subclasses of `name` (classes whose `extends` is exactly `name`).
    pub fn direct_subclasses(&self, name: &str) -> Vec<&ClassDef> {
        self.classes
            .values()
            .filter(|c| c.superclass.as_deref() == Some(name))
            .collect()
    }

    /// Classes that list `name` directly in their `implements` clause.
    pub fn direct_implementers(&self, name: &str) -> Vec<&ClassDef> {
        self.classes
            .values()
            .filter(|c| c.interfaces.iter().any(|i| i == name))
            .collect()
    }

    /// Standard virtual lookup: nearest definition of (name, params) walking
    /// up the superclass chain from `owner`.
    pub fn resolve_in_hierarchy(&self, owner: &str, name: &str, params: &[String]) -> Option<&MethodDef> {
        let mut cur = Some(owner.to_string());
        while let Some(cls) = cur {
            if let Some(c) = self.classes.get(&cls) {
                if let Some(m) = c
                    .methods
                    .iter()
                    .find(|m| m.sig.name == name && m.sig.params == params)
                {
                    return Some(m);
                }
                cur = c.superclass.clone();
            } else {
                break;
            }
        }
        None
    }

    /// Merge classes from `other`; duplicate class names are an error.
    pub fn merge(&mut self, other: Program) -> Result<(), String> {
        for (name, class) in other.classes {
            match self.classes.get(&name) {
                // Phantom entries merge silently; a concrete duplicate is a conflict.
                Some(existing) if !existing.is_phantom && !class.is_phantom => {
                    return Err(format!("duplicate class `{name}` across inputs"));
                }
                Some(existing) if existing.is_phantom && !class.is_phantom => {
                    self.classes.insert(name, class);
                }
                Some(_) => {}
                None => {
                    self.classes.insert(name, class);
                }
            }
        }
        Ok(())
    }
}
