//! Contiguous multi-dimensional storage mirrored in a host and a device space.

use std::cell::{Cell, RefCell};
use std::fmt;

use crate::error::{invalid_argument, Error, Result};

/// Memory space of an [`Array`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Host,
    Device,
}

impl Space {
    fn other(self) -> Self {
        match self {
            Space::Host => Space::Device,
            Space::Device => Space::Host,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Host => "host",
            Space::Device => "device",
        })
    }
}

/// Dimension order in memory: the last entry varies fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    order: Vec<usize>,
}

impl Layout {
    /// Row-major: the last dimension is contiguous.
    pub fn row_major(rank: usize) -> Self {
        Self {
            order: (0..rank).collect(),
        }
    }

    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &d in &order {
            if d >= order.len() || std::mem::replace(&mut seen[d], true) {
                return Err(invalid_argument(format!(
                    "layout {order:?} is not a permutation"
                )));
            }
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    fn strides(&self, shape: &[usize]) -> Vec<usize> {
        let mut strides = vec![0; shape.len()];
        let mut step = 1;
        for &d in self.order.iter().rev() {
            strides[d] = step;
            step *= shape[d];
        }
        strides
    }
}

/// Element types an [`Array`] can hold.
pub trait Element: Copy + Default + PartialEq + fmt::Debug + Send + 'static {
    const KIND: &'static str;
    fn to_f64(self) -> f64;
}

macro_rules! element {
    ($t:ty, $name:literal) => {
        impl Element for $t {
            const KIND: &'static str = $name;
            fn to_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

element!(i32, "int32");
element!(i64, "int64");
element!(f32, "real32");
element!(f64, "real64");

/// Storage with host and device buffers and the validity state of each.
///
/// A view stamps its space's generation at creation and stays valid while the
/// space is valid and the generation is unchanged. Writing through a
/// writable view invalidates the other space; the first write by a given
/// view also advances its own space's generation, so every other view of
/// that space goes stale.
pub struct Array<T: Element> {
    shape: Vec<usize>,
    layout: Layout,
    strides: Vec<usize>,
    buffers: [RefCell<Option<Vec<T>>>; 2],
    valid: [Cell<bool>; 2],
    generation: [Cell<u64>; 2],
    last_writer: Cell<u64>,
    next_view: Cell<u64>,
}

impl<T: Element> fmt::Debug for Array<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Array")
            .field("kind", &T::KIND)
            .field("shape", &self.shape)
            .field("layout", &self.layout.order)
            .field("host_valid", &self.host_valid())
            .field("device_valid", &self.device_valid())
            .finish()
    }
}

impl<T: Element> Clone for Array<T> {
    /// Deep copy with fresh view bookkeeping.
    fn clone(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            layout: self.layout.clone(),
            strides: self.strides.clone(),
            buffers: [
                RefCell::new(self.buffers[0].borrow().clone()),
                RefCell::new(self.buffers[1].borrow().clone()),
            ],
            valid: [
                Cell::new(self.valid[0].get()),
                Cell::new(self.valid[1].get()),
            ],
            generation: [Cell::new(0), Cell::new(0)],
            last_writer: Cell::new(0),
            next_view: Cell::new(1),
        }
    }
}

impl<T: Element> Array<T> {
    /// Zero-filled, row-major, valid on the host only.
    pub fn new(shape: &[usize]) -> Self {
        Self::with_layout(shape, Layout::row_major(shape.len()))
            .expect("row-major layout matches rank")
    }

    pub fn with_layout(shape: &[usize], layout: Layout) -> Result<Self> {
        if layout.order.len() != shape.len() {
            return Err(invalid_argument(format!(
                "layout of rank {} for shape {shape:?}",
                layout.order.len()
            )));
        }
        let size = shape.iter().product();
        Ok(Self {
            strides: layout.strides(shape),
            shape: shape.to_vec(),
            layout,
            buffers: [
                RefCell::new(Some(vec![T::default(); size])),
                RefCell::new(None),
            ],
            valid: [Cell::new(true), Cell::new(false)],
            generation: [Cell::new(0), Cell::new(0)],
            last_writer: Cell::new(0),
            next_view: Cell::new(1),
        })
    }

    /// Row-major array holding `values`.
    pub fn from_vec(shape: &[usize], values: Vec<T>) -> Result<Self> {
        let a = Self::new(shape);
        if values.len() != a.size() {
            return Err(invalid_argument(format!(
                "{} values for shape {shape:?}",
                values.len()
            )));
        }
        *a.buffers[0].borrow_mut() = Some(values);
        Ok(a)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn size(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Memory offset of a logical index.
    pub fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.rank() {
            return Err(invalid_argument(format!(
                "index of rank {} into array of rank {}",
                index.len(),
                self.rank()
            )));
        }
        let mut off = 0;
        for (d, (&i, &n)) in index.iter().zip(&self.shape).enumerate() {
            if i >= n {
                return Err(Error::Index { index: i, size: n });
            }
            off += i * self.strides[d];
        }
        Ok(off)
    }

    pub fn is_valid(&self, space: Space) -> bool {
        self.valid[space.slot()].get()
    }

    pub fn host_valid(&self) -> bool {
        self.is_valid(Space::Host)
    }

    pub fn device_valid(&self) -> bool {
        self.is_valid(Space::Device)
    }

    pub fn has_device(&self) -> bool {
        self.buffers[Space::Device.slot()].borrow().is_some()
    }

    fn copy(&self, from: Space, to: Space) -> Result<()> {
        if !self.is_valid(from) {
            return Err(Error::State(format!(
                "cannot clone from invalid {from} memory"
            )));
        }
        let src = self.buffers[from.slot()]
            .try_borrow()
            .map_err(|_| Error::State(format!("{from} memory is being written")))?;
        let mut dst = self.buffers[to.slot()]
            .try_borrow_mut()
            .map_err(|_| Error::State(format!("{to} memory is in use")))?;
        *dst = src.clone();
        self.valid[to.slot()].set(true);
        Ok(())
    }

    /// Copy host memory to the device, allocating it on first use.
    pub fn clone_to_device(&self) -> Result<()> {
        self.copy(Space::Host, Space::Device)
    }

    pub fn clone_from_device(&self) -> Result<()> {
        self.copy(Space::Device, Space::Host)
    }

    /// Make both spaces valid by copying from whichever one is valid.
    pub fn synchronize(&self) -> Result<()> {
        match (self.host_valid(), self.device_valid()) {
            (true, false) => self.clone_to_device(),
            (false, true) => self.clone_from_device(),
            _ => Ok(()),
        }
    }

    /// View into `space`. Fails if that space is not valid.
    pub fn view(&self, space: Space, writable: bool) -> Result<ArrayView<'_, T>> {
        if !self.is_valid(space) {
            return Err(Error::State(format!("{space} memory is not valid")));
        }
        let id = self.next_view.get();
        self.next_view.set(id + 1);
        Ok(ArrayView {
            array: self,
            space,
            writable,
            id,
            generation: Cell::new(self.generation[space.slot()].get()),
        })
    }

    pub fn host_view(&self) -> Result<ArrayView<'_, T>> {
        self.view(Space::Host, true)
    }

    pub fn host_view_read_only(&self) -> Result<ArrayView<'_, T>> {
        self.view(Space::Host, false)
    }

    pub fn device_view(&self) -> Result<ArrayView<'_, T>> {
        self.view(Space::Device, true)
    }

    pub fn device_view_read_only(&self) -> Result<ArrayView<'_, T>> {
        self.view(Space::Device, false)
    }

    /// Host values in memory order.
    pub fn host_values(&self) -> Result<Vec<T>> {
        self.host_view_read_only()?.with(|s| s.to_vec())
    }
}

/// Typed accessor into one memory space of an [`Array`].
pub struct ArrayView<'a, T: Element> {
    array: &'a Array<T>,
    space: Space,
    writable: bool,
    id: u64,
    generation: Cell<u64>,
}

impl<T: Element> fmt::Debug for ArrayView<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArrayView")
            .field("space", &self.space)
            .field("writable", &self.writable)
            .field("valid", &self.valid())
            .finish()
    }
}

impl<'a, T: Element> ArrayView<'a, T> {
    pub fn space(&self) -> Space {
        self.space
    }

    pub fn is_writable(&self) -> bool {
        self.writable
    }

    pub fn shape(&self) -> &'a [usize] {
        &self.array.shape
    }

    pub fn rank(&self) -> usize {
        self.array.rank()
    }

    pub fn valid(&self) -> bool {
        let s = self.space.slot();
        self.array.valid[s].get() && self.generation.get() == self.array.generation[s].get()
    }

    fn check_valid(&self) -> Result<()> {
        if self.valid() {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "access through an invalidated {} view",
                self.space
            )))
        }
    }

    /// Record a write by this view.
    fn begin_write(&self) -> Result<()> {
        if !self.writable {
            return Err(Error::Contract("write through a read-only view".into()));
        }
        self.check_valid()?;
        let a = self.array;
        a.valid[self.space.other().slot()].set(false);
        if a.last_writer.get() != self.id {
            let g = &a.generation[self.space.slot()];
            g.set(g.get() + 1);
            a.last_writer.set(self.id);
        }
        self.generation.set(a.generation[self.space.slot()].get());
        Ok(())
    }

    pub fn get(&self, index: &[usize]) -> Result<T> {
        self.check_valid()?;
        let off = self.array.offset(index)?;
        let buf = self.array.buffers[self.space.slot()]
            .try_borrow()
            .map_err(|_| Error::State("memory is being written".into()))?;
        Ok(buf.as_ref().expect("valid space is allocated")[off])
    }

    pub fn set(&self, index: &[usize], value: T) -> Result<()> {
        let off = self.array.offset(index)?;
        self.begin_write()?;
        let mut buf = self.array.buffers[self.space.slot()]
            .try_borrow_mut()
            .map_err(|_| Error::State("memory is in use".into()))?;
        buf.as_mut().expect("valid space is allocated")[off] = value;
        Ok(())
    }

    /// Run `f` on the whole buffer in memory order.
    pub fn with<R>(&self, f: impl FnOnce(&[T]) -> R) -> Result<R> {
        self.check_valid()?;
        let buf = self.array.buffers[self.space.slot()]
            .try_borrow()
            .map_err(|_| Error::State("memory is being written".into()))?;
        Ok(f(buf.as_ref().expect("valid space is allocated")))
    }

    /// Run `f` on the whole mutable buffer in memory order; counts as a write.
    pub fn with_mut<R>(&self, f: impl FnOnce(&mut [T]) -> R) -> Result<R> {
        self.begin_write()?;
        let mut buf = self.array.buffers[self.space.slot()]
            .try_borrow_mut()
            .map_err(|_| Error::State("memory is in use".into()))?;
        Ok(f(buf.as_mut().expect("valid space is allocated")))
    }

    pub fn fill(&self, value: T) -> Result<()> {
        self.with_mut(|s| s.fill(value))
    }
}
