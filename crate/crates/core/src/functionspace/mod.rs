//! Interpretations of fields over mesh nodes, mesh edges and structured grid
//! columns, with their parallel operations.

mod columns;
mod statistics;

use std::sync::atomic::{AtomicU64, Ordering};

pub use columns::{EdgeColumns, NodeColumns, StructuredColumns};
pub use statistics::Statistics;

use crate::error::{invalid_argument, Result};
use crate::field::{Field, FieldData, Kind};
use crate::mesh::{Gidx, Idx};
use crate::parallel::{Comm, GatherScatterPlan, HaloExchangePlan};

fn next_id(kind: &str) -> String {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    format!("{kind}#{}", COUNTER.fetch_add(1, Ordering::Relaxed))
}

/// Plans and sizes shared by every column function space. Opaque.
#[derive(Debug)]
pub struct Columns {
    id: String,
    comm: Comm,
    size: usize,
    nb_owned: usize,
    halo_plan: HaloExchangePlan,
    gather_plan: GatherScatterPlan,
}

impl Columns {
    /// Collective: builds both plans from the first `size` identity entries.
    fn build(
        kind: &str,
        partition: &[Idx],
        remote_index: &[Idx],
        global_index: &[Gidx],
        comm: &Comm,
    ) -> Result<Self> {
        let me = comm.rank() as Idx;
        let ghost: Vec<bool> = partition.iter().map(|&p| p != me).collect();
        let halo_plan = HaloExchangePlan::build(partition, remote_index, global_index, comm)?;
        let gather_plan = GatherScatterPlan::build(global_index, &ghost, 0, comm)?;
        Ok(Self {
            id: next_id(kind),
            comm: comm.clone(),
            size: partition.len(),
            nb_owned: ghost.iter().filter(|g| !**g).count(),
            halo_plan,
            gather_plan,
        })
    }
}

/// Common operations of the column function spaces.
pub trait FunctionSpace {
    #[doc(hidden)]
    fn columns(&self) -> &Columns;

    /// Kind and instance tag stored on fields created here.
    fn id(&self) -> &str {
        &self.columns().id
    }

    /// Number of columns including halo.
    fn size(&self) -> usize {
        self.columns().size
    }

    fn nb_owned(&self) -> usize {
        self.columns().nb_owned
    }

    /// Number of columns over all ranks.
    fn nb_global(&self) -> usize {
        self.columns().gather_plan.nb_global()
    }

    fn comm(&self) -> &Comm {
        &self.columns().comm
    }

    fn halo_plan(&self) -> &HaloExchangePlan {
        &self.columns().halo_plan
    }

    fn gather_plan(&self) -> &GatherScatterPlan {
        &self.columns().gather_plan
    }

    /// Zero field of shape `(size[, levels][, variables])`; 0 drops a dimension.
    fn create_field(&self, name: &str, kind: Kind, levels: usize, variables: usize) -> Field {
        let levels = (levels > 0).then_some(levels);
        let variables = (variables > 0).then_some(variables);
        let shape: Vec<usize> = std::iter::once(self.size())
            .chain(levels)
            .chain(variables)
            .collect();
        let mut f = Field::new(name, kind, &shape);
        f.attach(self.id(), self.size(), levels, variables)
            .expect("shape built to fit");
        f
    }

    /// Collective. Copy owner values into every ghost row.
    fn halo_exchange(&self, field: &Field) -> Result<()> {
        let block = self.check(field)?;
        let (plan, comm) = (self.halo_plan(), self.comm());
        match field.data() {
            FieldData::Int32(a) => a.host_view()?.with_mut(|s| plan.execute(s, block, comm))?,
            FieldData::Int64(a) => a.host_view()?.with_mut(|s| plan.execute(s, block, comm))?,
            FieldData::Real32(a) => a.host_view()?.with_mut(|s| plan.execute(s, block, comm))?,
            FieldData::Real64(a) => a.host_view()?.with_mut(|s| plan.execute(s, block, comm))?,
        }
    }

    /// Collective. Owned rows of all ranks in global order, at rank 0.
    fn gather(&self, field: &Field) -> Result<Option<Field>> {
        let block = self.check(field)?;
        let (plan, comm) = (self.gather_plan(), self.comm());
        let mut shape = field.shape().to_vec();
        shape[0] = plan.nb_global();
        macro_rules! go {
            ($a:expr, $variant:ident) => {{
                let values = $a
                    .host_view_read_only()?
                    .with(|s| plan.gather(s, block, comm))??;
                values
                    .map(|v| crate::field::Array::from_vec(&shape, v).map(FieldData::$variant))
                    .transpose()?
            }};
        }
        let data = match field.data() {
            FieldData::Int32(a) => go!(a, Int32),
            FieldData::Int64(a) => go!(a, Int64),
            FieldData::Real32(a) => go!(a, Real32),
            FieldData::Real64(a) => go!(a, Real64),
        };
        Ok(data.map(|d| Field::from_data(field.name(), d)))
    }

    /// Collective. Fill owned rows of `field` from the global field held by rank 0.
    fn scatter(&self, global: Option<&Field>, field: &Field) -> Result<()> {
        let block = self.check(field)?;
        let (plan, comm) = (self.gather_plan(), self.comm());
        macro_rules! go {
            ($a:expr, $t:ty) => {{
                let src: Option<Vec<$t>> = match global {
                    Some(g) => Some(g.array::<$t>()?.host_values()?),
                    None => None,
                };
                $a.host_view()?
                    .with_mut(|s| plan.scatter(src.as_deref(), s, block, comm))?
            }};
        }
        match field.data() {
            FieldData::Int32(a) => go!(a, i32),
            FieldData::Int64(a) => go!(a, i64),
            FieldData::Real32(a) => go!(a, f32),
            FieldData::Real64(a) => go!(a, f64),
        }
    }

    /// Collective. Min, max, sum and mean per level over owned rows.
    fn statistics(&self, field: &Field) -> Result<Vec<Statistics>> {
        self.check(field)?;
        statistics::compute(field, &self.owned_rows(), self.comm())
    }

    /// Local rows owned by this rank, ascending.
    fn owned_rows(&self) -> Vec<usize>;

    /// Values per row; fails for fields of another function space.
    #[doc(hidden)]
    fn check(&self, field: &Field) -> Result<usize> {
        if field.functionspace() != Some(self.id()) {
            return Err(invalid_argument(format!(
                "field `{}` does not belong to {}",
                field.name(),
                self.id()
            )));
        }
        Ok(field.shape()[1..].iter().product())
    }
}
