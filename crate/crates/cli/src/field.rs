//! Turning `--catalog` / `--component` / `--param` into a field definition.

use fracdyn::field_expr::catalog::{self, Entry};
use fracdyn::field_expr::{ExprError, FieldDef};
use serde_json::{json, Value};

use crate::args::FieldArgs;
use crate::{usage, CliError};

/// A field definition with concrete parameter values.
#[derive(Debug, Clone)]
pub struct ResolvedField {
    pub name: String,
    pub def: FieldDef,
    pub params: Vec<f64>,
}

impl ResolvedField {
    pub fn dim(&self) -> usize {
        self.def.dimension()
    }

    pub fn describe(&self) -> Value {
        let components: Vec<String> = (0..self.dim()).map(|i| self.def.component_text(i)).collect();
        let params: serde_json::Map<String, Value> = self
            .def
            .parameters()
            .iter()
            .zip(&self.params)
            .map(|(k, &v)| (k.clone(), json!(v)))
            .collect();
        json!({ "name": self.name, "components": components, "params": params })
    }

    pub fn require_scalar(&self) -> Result<(), CliError> {
        if self.dim() == 1 {
            Ok(())
        } else {
            Err(usage(format!("'{}' has dimension {}, a scalar field is required", self.name, self.dim())))
        }
    }
}

pub fn expr_error(src: &str, e: &ExprError) -> CliError {
    match e.offset() {
        Some(off) => usage(format!("in '{src}' at offset {off}: {e}")),
        None => usage(format!("in '{src}': {e}")),
    }
}

/// Overrides named parameter values; unknown names are usage errors.
pub fn apply_params(def: &FieldDef, params: &mut [f64], overrides: &[(String, f64)]) -> Result<(), CliError> {
    for (k, v) in overrides {
        let i = def
            .param_index(k)
            .ok_or_else(|| usage(format!("the field has no parameter '{k}'")))?;
        params[i] = *v;
    }
    Ok(())
}

pub fn resolve(args: &FieldArgs) -> Result<ResolvedField, CliError> {
    match (&args.catalog, args.component.is_empty()) {
        (Some(name), true) => from_catalog(name, &args.param),
        (None, false) => {
            let names: Vec<String> = args.param.iter().map(|p| p.0.clone()).collect();
            let def = FieldDef::parse(&args.component, &names).map_err(|e| {
                let src = args.component.join("; ");
                expr_error(&src, &e)
            })?;
            let params = args.param.iter().map(|p| p.1).collect();
            Ok(ResolvedField {
                name: "custom".into(),
                def,
                params,
            })
        }
        (Some(_), false) => Err(usage("--catalog cannot be combined with --component")),
        (None, true) => Err(usage("a field is required: pass --catalog NAME or --component EXPR")),
    }
}

pub fn from_catalog(name: &str, overrides: &[(String, f64)]) -> Result<ResolvedField, CliError> {
    let entry = catalog::lookup(name).ok_or_else(|| {
        usage(format!(
            "unknown catalog field '{name}' (known: {})",
            catalog::names().join(", ")
        ))
    })?;
    let (def, mut params) = match entry {
        Entry::Field(c) => (c.field(), c.default_params()),
        Entry::Triangular(t) => (t.field().map_err(|e| usage(e.to_string()))?, Vec::new()),
    };
    apply_params(&def, &mut params, overrides)?;
    Ok(ResolvedField {
        name: name.to_string(),
        def,
        params,
    })
}
