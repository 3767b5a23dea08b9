//! Shared vocabulary: object types, objects, colors, variables, inscriptions and tokens.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Name of an object type, e.g. `Wheel`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectType(Arc<str>);

impl ObjectType {
    pub fn new(name: impl AsRef<str>) -> Self {
        ObjectType(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ObjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ObjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectType {
    fn from(s: &str) -> Self {
        ObjectType::new(s)
    }
}

/// An object identifier together with its type.
///
/// Objects order by identifier first, so sorted object collections follow id order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId {
    id: Arc<str>,
    ty: ObjectType,
}

impl ObjectId {
    pub fn new(id: impl AsRef<str>, ty: ObjectType) -> Self {
        ObjectId { id: Arc::from(id.as_ref()), ty }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn object_type(&self) -> &ObjectType {
        &self.ty
    }
}

impl fmt::Debug for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.id, self.ty)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// Objects serialize as their bare identifier.
impl Serialize for ObjectId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

/// A place color: a non-empty tuple of object types.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Color(Vec<ObjectType>);

impl Color {
    /// Returns `None` for an empty component list.
    pub fn new(components: Vec<ObjectType>) -> Option<Self> {
        if components.is_empty() {
            None
        } else {
            Some(Color(components))
        }
    }

    pub fn single(ty: ObjectType) -> Self {
        Color(vec![ty])
    }

    pub fn pair(first: ObjectType, second: ObjectType) -> Self {
        Color(vec![first, second])
    }

    pub fn components(&self) -> &[ObjectType] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ty) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(ty.as_str())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    /// Binds a single object.
    Normal,
    /// Binds a non-empty list of objects of the base type.
    List,
    /// Binds an object that must not occur in the current marking.
    Fresh,
}

impl VarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::Normal => "normal",
            VarKind::List => "list",
            VarKind::Fresh => "fresh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "normal" => Some(VarKind::Normal),
            "list" => Some(VarKind::List),
            "fresh" => Some(VarKind::Fresh),
            _ => None,
        }
    }
}

/// A typed inscription variable. For list variables `base_type` is the element type.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    kind: VarKind,
    base_type: ObjectType,
    name: Arc<str>,
}

impl Variable {
    pub fn new(kind: VarKind, base_type: ObjectType, name: impl AsRef<str>) -> Self {
        Variable { kind, base_type, name: Arc::from(name.as_ref()) }
    }

    /// Canonical single-object variable `x_σ`.
    pub fn normal(ty: &ObjectType) -> Self {
        Variable::new(VarKind::Normal, ty.clone(), format!("x_{ty}"))
    }

    /// Canonical list variable `X_σ`.
    pub fn list(ty: &ObjectType) -> Self {
        Variable::new(VarKind::List, ty.clone(), format!("X_{ty}"))
    }

    /// Canonical fresh-object variable `ν_σ`.
    pub fn fresh(ty: &ObjectType) -> Self {
        Variable::new(VarKind::Fresh, ty.clone(), format!("nu_{ty}"))
    }

    pub fn kind(&self) -> VarKind {
        self.kind
    }

    pub fn base_type(&self) -> &ObjectType {
        &self.base_type
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InscriptionError {
    #[error("inscription must have at least one variable")]
    Empty,
    #[error("inscription has more than one list variable")]
    MultipleLists,
}

/// Arc inscription: a tuple of variables with at most one list variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Inscription(Vec<Variable>);

impl Inscription {
    pub fn new(vars: Vec<Variable>) -> Result<Self, InscriptionError> {
        if vars.is_empty() {
            return Err(InscriptionError::Empty);
        }
        if vars.iter().filter(|v| v.kind == VarKind::List).count() > 1 {
            return Err(InscriptionError::MultipleLists);
        }
        Ok(Inscription(vars))
    }

    pub fn single(var: Variable) -> Self {
        Inscription(vec![var])
    }

    pub fn vars(&self) -> &[Variable] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of the list variable, if this is a template inscription.
    pub fn list_position(&self) -> Option<usize> {
        self.0.iter().position(|v| v.kind == VarKind::List)
    }

    pub fn is_template(&self) -> bool {
        self.list_position().is_some()
    }

    pub fn color(&self) -> Color {
        Color(self.0.iter().map(|v| v.base_type.clone()).collect())
    }

    pub fn has_fresh(&self) -> bool {
        self.0.iter().any(|v| v.kind == VarKind::Fresh)
    }
}

impl fmt::Debug for Inscription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Inscription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(v.name())?;
        }
        f.write_str(">")
    }
}

/// An object tuple residing in an OPID place.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Token(Vec<ObjectId>);

impl Token {
    /// Returns `None` for an empty tuple.
    pub fn new(objects: Vec<ObjectId>) -> Option<Self> {
        if objects.is_empty() {
            None
        } else {
            Some(Token(objects))
        }
    }

    pub fn single(o: ObjectId) -> Self {
        Token(vec![o])
    }

    pub fn objects(&self) -> &[ObjectId] {
        &self.0
    }

    pub fn color(&self) -> Color {
        Color(self.0.iter().map(|o| o.object_type().clone()).collect())
    }
}

impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, o) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(o.id())?;
        }
        f.write_str(">")
    }
}

/// Ordered object type pair `(many, one)` of a many-to-one relationship.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct TypePair {
    pub many: ObjectType,
    pub one: ObjectType,
}

impl TypePair {
    pub fn new(many: impl Into<ObjectType>, one: impl Into<ObjectType>) -> Self {
        TypePair { many: many.into(), one: one.into() }
    }

    pub fn reversed(&self) -> Self {
        TypePair { many: self.one.clone(), one: self.many.clone() }
    }
}

impl fmt::Display for TypePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.many, self.one)
    }
}

macro_rules! id_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(id: impl AsRef<str>) -> Self {
                $name(Arc::from(id.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name::new(s)
            }
        }
    };
}

id_newtype!(
    /// Identifier of a place.
    PlaceId
);
id_newtype!(
    /// Identifier of a transition.
    TransitionId
);
