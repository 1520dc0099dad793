//! Canonical text form of a [`Program`]. `parse(render(p))` is structurally
//! equal to `p` (instruction line numbers shift with the layout).

use super::*;
use std::fmt::Write;

pub fn render_program(program: &Program) -> String {
    let mut out = String::new();
    for class in program.classes.values() {
        if class.is_phantom {
            continue;
        }
        render_class(&mut out, class);
    }
    out
}

fn render_class(out: &mut String, class: &ClassDef) {
    let _ = write!(out, "class {}", class.name);
    if let Some(s) = &class.superclass {
        let _ = write!(out, " extends {s}");
    }
    if !class.interfaces.is_empty() {
        let _ = write!(out, " implements {}", class.interfaces.join(", "));
    }
    out.push_str(" {\n");
    for field in &class.fields {
        let st = if field.is_static { "static " } else { "" };
        let _ = writeln!(out, "  {st}field {} {}", field.declared_type, field.name);
    }
    for method in &class.methods {
        let _ = writeln!(
            out,
            "  method {} {}({}) {{",
            method.sig.ret,
            method.sig.name,
            method.sig.params.join(", ")
        );
        for (i, local) in method.param_locals.iter().enumerate() {
            let _ = writeln!(out, "    {local} := param {i}");
        }
        for instr in method.body() {
            let _ = writeln!(out, "    {}", render_op(&instr.op));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
}

pub(crate) fn render_op(op: &Op) -> String {
    match op {
        Op::Assign { target, rhs } => format!("{} = {}", render_lvalue(target), render_rhs(rhs)),
        Op::Invoke(inv) => render_invoke(inv),
        Op::NewArray { target, elem_type, size } => {
            format!("{target} = newarray {elem_type}[{}]", render_value(size))
        }
        Op::Return(None) => "return".to_string(),
        Op::Return(Some(v)) => format!("return {}", render_value(v)),
        Op::Throw(v) => format!("throw {}", render_value(v)),
        Op::If { left, cmp, right, label } => format!(
            "if {} {} {} goto {label}",
            render_value(left),
            cmp.symbol(),
            render_value(right)
        ),
        Op::Goto(label) => format!("goto {label}"),
        Op::Label(name) => format!("{name}:"),
    }
}

fn render_invoke(inv: &InvokeOp) -> String {
    let args: Vec<String> = inv.args.iter().map(render_value).collect();
    let call = match (&inv.kind, &inv.base) {
        (InvokeKind::Virtual, Some(base)) => {
            format!("{base}.{}({})", inv.callee.jvm_style(), args.join(", "))
        }
        (kind, Some(base)) => {
            format!("{} {base}.{}({})", kind.keyword(), inv.callee.jvm_style(), args.join(", "))
        }
        (kind, None) => format!("{} {}({})", kind.keyword(), inv.callee.jvm_style(), args.join(", ")),
    };
    match &inv.assign_target {
        Some(t) => format!("{t} = {call}"),
        None => call,
    }
}

fn render_lvalue(lv: &LValue) -> String {
    match lv {
        LValue::Local(name) => name.clone(),
        LValue::Field(f) => render_field(f),
        LValue::Array { base, index } => format!("{base}[{}]", render_value(index)),
    }
}

fn render_rhs(rhs: &Rhs) -> String {
    match rhs {
        Rhs::Value(v) => render_value(v),
        Rhs::Field(f) => render_field(f),
        Rhs::ArrayLoad { base, index } => format!("{base}[{}]", render_value(index)),
    }
}

fn render_field(f: &FieldRef) -> String {
    match &f.base {
        FieldBase::This => format!("this.<{}>", f.name),
        FieldBase::Local(b) => format!("{b}.<{}>", f.name),
        FieldBase::StaticOwner(o) => format!("<{o}>.<{}>", f.name),
    }
}

fn render_value(v: &Value) -> String {
    match v {
        Value::Local(name) => name.clone(),
        Value::This => "this".to_string(),
        Value::ConstString(s) => {
            let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
            format!("\"{escaped}\"")
        }
        Value::ConstInt(i) => i.to_string(),
        Value::ConstLong(i) => format!("{i}L"),
        Value::ConstBool(b) => b.to_string(),
        Value::ConstChar(c) => format!("'{c}'"),
        Value::ConstNull => "null".to_string(),
    }
}

/// Structural program equality: everything except instruction line numbers
/// and origin file labels.
pub fn structural_eq(a: &Program, b: &Program) -> bool {
    if a.classes.len() != b.classes.len() {
        return false;
    }
    a.classes.iter().zip(b.classes.iter()).all(|((na, ca), (nb, cb))| {
        na == nb
            && ca.superclass == cb.superclass
            && ca.interfaces == cb.interfaces
            && ca.fields == cb.fields
            && ca.is_phantom == cb.is_phantom
            && ca.methods.len() == cb.methods.len()
            && ca.methods.iter().zip(cb.methods.iter()).all(|(ma, mb)| {
                ma.sig == mb.sig
                    && ma.param_locals == mb.param_locals
                    && match (&ma.body, &mb.body) {
                        (None, None) => true,
                        (Some(ba), Some(bb)) => {
                            ba.len() == bb.len()
                                && ba.iter().zip(bb.iter()).all(|(ia, ib)| ia.op == ib.op)
                        }
                        _ => false,
                    }
            })
    })
}
