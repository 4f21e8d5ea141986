//! Named fields over arrays, their metadata, and field sets.

mod array;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use array::{Array, ArrayView, Element, Layout, Space};

use crate::error::{invalid_argument, Error, Result};

/// A metadata value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl From<bool> for MetaValue {
    fn from(v: bool) -> Self {
        MetaValue::Bool(v)
    }
}

impl From<i64> for MetaValue {
    fn from(v: i64) -> Self {
        MetaValue::Int(v)
    }
}

impl From<i32> for MetaValue {
    fn from(v: i32) -> Self {
        MetaValue::Int(v.into())
    }
}

impl From<usize> for MetaValue {
    fn from(v: usize) -> Self {
        MetaValue::Int(v as i64)
    }
}

impl From<f64> for MetaValue {
    fn from(v: f64) -> Self {
        MetaValue::Float(v)
    }
}

impl From<&str> for MetaValue {
    fn from(v: &str) -> Self {
        MetaValue::Str(v.to_string())
    }
}

impl From<String> for MetaValue {
    fn from(v: String) -> Self {
        MetaValue::Str(v)
    }
}

/// String-keyed simple values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Metadata(BTreeMap<String, MetaValue>);

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<MetaValue>) -> &mut Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<&MetaValue> {
        self.0.get(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        match self.0.get(key) {
            Some(MetaValue::Str(s)) => Some(s),
            _ => None,
        }
    }

    pub fn get_int(&self, key: &str) -> Option<i64> {
        match self.0.get(key) {
            Some(MetaValue::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn get_float(&self, key: &str) -> Option<f64> {
        match self.0.get(key) {
            Some(MetaValue::Float(v)) => Some(*v),
            Some(MetaValue::Int(v)) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn get_bool(&self, key: &str) -> Option<bool> {
        match self.0.get(key) {
            Some(MetaValue::Bool(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MetaValue)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Value kind of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Int32,
    Int64,
    Real32,
    Real64,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Int32 => "int32",
            Kind::Int64 => "int64",
            Kind::Real32 => "real32",
            Kind::Real64 => "real64",
        }
    }
}

/// Type-erased array of a field.
#[derive(Clone, Debug)]
pub enum FieldData {
    Int32(Array<i32>),
    Int64(Array<i64>),
    Real32(Array<f32>),
    Real64(Array<f64>),
}

macro_rules! dispatch {
    ($data:expr, $a:ident => $body:expr) => {
        match $data {
            FieldData::Int32($a) => $body,
            FieldData::Int64($a) => $body,
            FieldData::Real32($a) => $body,
            FieldData::Real64($a) => $body,
        }
    };
}

impl FieldData {
    pub fn zeros(kind: Kind, shape: &[usize], layout: Layout) -> Result<Self> {
        Ok(match kind {
            Kind::Int32 => FieldData::Int32(Array::with_layout(shape, layout)?),
            Kind::Int64 => FieldData::Int64(Array::with_layout(shape, layout)?),
            Kind::Real32 => FieldData::Real32(Array::with_layout(shape, layout)?),
            Kind::Real64 => FieldData::Real64(Array::with_layout(shape, layout)?),
        })
    }

    pub fn kind(&self) -> Kind {
        match self {
            FieldData::Int32(_) => Kind::Int32,
            FieldData::Int64(_) => Kind::Int64,
            FieldData::Real32(_) => Kind::Real32,
            FieldData::Real64(_) => Kind::Real64,
        }
    }

    pub fn shape(&self) -> &[usize] {
        dispatch!(self, a => a.shape())
    }

    pub fn layout(&self) -> &Layout {
        dispatch!(self, a => a.layout())
    }
}

/// Element types that can be pulled out of [`FieldData`].
pub trait FieldElement: Element {
    const FIELD_KIND: Kind;
    fn array(data: &FieldData) -> Option<&Array<Self>>;
    fn wrap(array: Array<Self>) -> FieldData;
}

macro_rules! field_element {
    ($t:ty, $variant:ident) => {
        impl FieldElement for $t {
            const FIELD_KIND: Kind = Kind::$variant;
            fn array(data: &FieldData) -> Option<&Array<Self>> {
                match data {
                    FieldData::$variant(a) => Some(a),
                    _ => None,
                }
            }
            fn wrap(array: Array<Self>) -> FieldData {
                FieldData::$variant(array)
            }
        }
    };
}

field_element!(i32, Int32);
field_element!(i64, Int64);
field_element!(f32, Real32);
field_element!(f64, Real64);

/// Named array with metadata, optionally tied to a function space.
#[derive(Clone, Debug)]
pub struct Field {
    name: String,
    data: FieldData,
    pub metadata: Metadata,
    functionspace: Option<String>,
    levels: Option<usize>,
    variables: Option<usize>,
}

impl Field {
    /// Zero-filled field with the default (row-major) layout.
    pub fn new(name: &str, kind: Kind, shape: &[usize]) -> Self {
        Self::from_data(
            name,
            FieldData::zeros(kind, shape, Layout::row_major(shape.len()))
                .expect("row-major layout"),
        )
    }

    pub fn with_metadata(name: &str, kind: Kind, shape: &[usize], metadata: Metadata) -> Self {
        let mut f = Self::new(name, kind, shape);
        f.metadata = metadata;
        f
    }

    pub fn from_data(name: &str, data: FieldData) -> Self {
        let mut metadata = Metadata::new();
        metadata.set("name", name);
        Self {
            name: name.to_string(),
            data,
            metadata,
            functionspace: None,
            levels: None,
            variables: None,
        }
    }

    pub fn from_array<T: FieldElement>(name: &str, array: Array<T>) -> Self {
        Self::from_data(name, T::wrap(array))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Kind {
        self.data.kind()
    }

    pub fn shape(&self) -> &[usize] {
        self.data.shape()
    }

    pub fn size(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn data(&self) -> &FieldData {
        &self.data
    }

    /// Typed array; fails when `T` differs from the field's kind.
    pub fn array<T: FieldElement>(&self) -> Result<&Array<T>> {
        T::array(&self.data).ok_or_else(|| {
            invalid_argument(format!(
                "field `{}` holds {}, not {}",
                self.name,
                self.kind().name(),
                T::FIELD_KIND.name()
            ))
        })
    }

    pub fn functionspace(&self) -> Option<&str> {
        self.functionspace.as_deref()
    }

    pub fn levels(&self) -> Option<usize> {
        self.levels
    }

    pub fn variables(&self) -> Option<usize> {
        self.variables
    }

    /// Tie to a function space; the first dimension must equal its size.
    pub(crate) fn attach(
        &mut self,
        functionspace: &str,
        size: usize,
        levels: Option<usize>,
        variables: Option<usize>,
    ) -> Result<()> {
        let expected: Vec<usize> = std::iter::once(size)
            .chain(levels)
            .chain(variables)
            .collect();
        if self.shape() != expected.as_slice() {
            return Err(invalid_argument(format!(
                "field `{}` of shape {:?} does not fit {functionspace} shape {expected:?}",
                self.name,
                self.shape()
            )));
        }
        self.functionspace = Some(functionspace.to_string());
        self.levels = levels;
        self.variables = variables;
        if let Some(l) = levels {
            self.metadata.set("levels", l);
        }
        if let Some(v) = variables {
            self.metadata.set("variables", v);
        }
        self.metadata.set("functionspace", functionspace);
        Ok(())
    }

    /// `{name, kind, shape, metadata, values}` with host values in logical order.
    pub fn to_json(&self) -> Result<Value> {
        let values = dispatch!(&self.data, a => logical_values(a)?.into_iter().map(|v| json!(v)).collect::<Vec<_>>());
        Ok(json!({
            "name": self.name,
            "kind": self.kind(),
            "shape": self.shape(),
            "metadata": self.metadata,
            "values": values,
        }))
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Dump {
            name: String,
            kind: Kind,
            shape: Vec<usize>,
            #[serde(default)]
            metadata: Metadata,
            values: Value,
        }
        let d: Dump = serde_json::from_value(value.clone())?;
        let data = match d.kind {
            Kind::Int32 => FieldData::Int32(Array::from_vec(
                &d.shape,
                serde_json::from_value(d.values)?,
            )?),
            Kind::Int64 => FieldData::Int64(Array::from_vec(
                &d.shape,
                serde_json::from_value(d.values)?,
            )?),
            Kind::Real32 => FieldData::Real32(Array::from_vec(
                &d.shape,
                serde_json::from_value(d.values)?,
            )?),
            Kind::Real64 => FieldData::Real64(Array::from_vec(
                &d.shape,
                serde_json::from_value(d.values)?,
            )?),
        };
        let mut f = Field::from_data(&d.name, data);
        f.metadata = d.metadata;
        Ok(f)
    }
}

/// Host values of `a` in row-major logical order.
fn logical_values<T: Element>(a: &Array<T>) -> Result<Vec<T>> {
    let view = a.host_view_read_only()?;
    let shape = a.shape().to_vec();
    let strides = a.strides().to_vec();
    view.with(|buf| {
        let mut out = Vec::with_capacity(buf.len());
        let mut index = vec![0usize; shape.len()];
        for _ in 0..buf.len() {
            out.push(
                buf[index
                    .iter()
                    .zip(&strides)
                    .map(|(i, s)| i * s)
                    .sum::<usize>()],
            );
            for d in (0..shape.len()).rev() {
                index[d] += 1;
                if index[d] < shape[d] {
                    break;
                }
                index[d] = 0;
            }
        }
        out
    })
}

/// Ordered, uniquely named fields.
#[derive(Clone, Debug, Default)]
pub struct FieldSet {
    fields: Vec<Field>,
    index: HashMap<String, usize>,
}

impl FieldSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, field: Field) -> Result<&mut Field> {
        if self.index.contains_key(field.name()) {
            return Err(Error::Conflict(format!(
                "field `{}` already in set",
                field.name()
            )));
        }
        self.index
            .insert(field.name().to_string(), self.fields.len());
        self.fields.push(field);
        Ok(self.fields.last_mut().unwrap())
    }

    pub fn get(&self, name: &str) -> Result<&Field> {
        self.index
            .get(name)
            .map(|&i| &self.fields[i])
            .ok_or_else(|| Error::NotFound(format!("no field `{name}`")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Field> {
        match self.index.get(name) {
            Some(&i) => Ok(&mut self.fields[i]),
            None => Err(Error::NotFound(format!("no field `{name}`"))),
        }
    }

    pub fn at(&self, i: usize) -> Result<&Field> {
        self.fields.get(i).ok_or(Error::Index {
            index: i,
            size: self.fields.len(),
        })
    }

    pub fn has(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(Field::name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Field> {
        self.fields.iter()
    }
}

impl std::ops::Index<&str> for FieldSet {
    type Output = Field;

    fn index(&self, name: &str) -> &Field {
        self.get(name).unwrap_or_else(|e| panic!("{e}"))
    }
}
