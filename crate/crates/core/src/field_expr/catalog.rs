//! Named fields used by the CLI and the verification battery.

use super::{ExprError, FieldDef};

/// A scalar (or general) field with default parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogField {
    pub name: &'static str,
    pub components: &'static [&'static str],
    pub params: &'static [(&'static str, f64)],
    pub summary: &'static str,
}

impl CatalogField {
    pub fn field(&self) -> FieldDef {
        let names: Vec<&str> = self.params.iter().map(|p| p.0).collect();
        FieldDef::parse(self.components, &names).expect("catalog expressions parse")
    }

    pub fn default_params(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.1).collect()
    }
}

/// A product-form triangular field g_i = h_i(x_1..x_{i-1}) f_i(x_i).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogTriangular {
    pub name: &'static str,
    pub h: &'static [&'static str],
    pub f: &'static [&'static str],
    pub summary: &'static str,
}

pub const LINEAR: CatalogField = CatalogField {
    name: "linear",
    components: &["-x"],
    params: &[],
    summary: "g(x) = -x",
};

pub const CUBIC: CatalogField = CatalogField {
    name: "cubic",
    components: &["x - x^3"],
    params: &[],
    summary: "g(x) = x - x^3, steady states -1, 0, 1",
};

pub const LOGISTIC: CatalogField = CatalogField {
    name: "logistic",
    components: &["x*(1 - x)"],
    params: &[],
    summary: "g(x) = x(1 - x); not dissipative",
};

pub const SADDLE: CatalogField = CatalogField {
    name: "saddle",
    components: &["gamma - x^2"],
    params: &[("gamma", 0.25)],
    summary: "saddle-node family g(x) = gamma - x^2",
};

pub const PITCHFORK: CatalogField = CatalogField {
    name: "pitchfork",
    components: &["gamma*x - x^3"],
    params: &[("gamma", 1.0)],
    summary: "pitchfork family g(x) = gamma x - x^3",
};

pub const FIG2: CatalogTriangular = CatalogTriangular {
    name: "fig2",
    h: &["1", "1 + x^2"],
    f: &["x*(1 - x^2)", "y*(1 - y^2)"],
    summary: "x' = x(1 - x^2), y' = (1 + x^2) y(1 - y^2); attractor [-1,1]^2",
};

pub const SEC3TEXT: CatalogTriangular = CatalogTriangular {
    name: "sec3text",
    h: &["1", "1 + x^2"],
    f: &["x*(1 - x)", "y*(1 - y^2)"],
    summary: "x' = x(1 - x), y' = (1 + x^2) y(1 - y^2); factor box [0,1]x[-1,1]",
};

pub const SCALAR_FIELDS: [CatalogField; 5] = [LINEAR, CUBIC, LOGISTIC, SADDLE, PITCHFORK];
pub const TRIANGULAR_FIELDS: [CatalogTriangular; 2] = [FIG2, SEC3TEXT];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry {
    Field(CatalogField),
    Triangular(CatalogTriangular),
}

pub fn lookup(name: &str) -> Option<Entry> {
    SCALAR_FIELDS
        .iter()
        .find(|e| e.name == name)
        .map(|e| Entry::Field(*e))
        .or_else(|| {
            TRIANGULAR_FIELDS
                .iter()
                .find(|e| e.name == name)
                .map(|e| Entry::Triangular(*e))
        })
}

pub fn names() -> Vec<&'static str> {
    SCALAR_FIELDS
        .iter()
        .map(|e| e.name)
        .chain(TRIANGULAR_FIELDS.iter().map(|e| e.name))
        .collect()
}

impl CatalogTriangular {
    /// The assembled field with components h_i * f_i.
    pub fn field(&self) -> Result<FieldDef, ExprError> {
        let comps: Vec<String> = self
            .h
            .iter()
            .zip(self.f)
            .map(|(h, f)| format!("({h}) * ({f})"))
            .collect();
        FieldDef::parse(&comps, &[])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses() {
        for e in SCALAR_FIELDS {
            assert_eq!(e.field().dimension(), 1);
        }
        for e in TRIANGULAR_FIELDS {
            assert_eq!(e.field().unwrap().dimension(), 2);
        }
        assert_eq!(names().len(), 7);
        assert!(matches!(lookup("cubic"), Some(Entry::Field(_))));
        assert!(matches!(lookup("fig2"), Some(Entry::Triangular(_))));
        assert!(lookup("nope").is_none());
    }
}
