//! Layer kernels. Activations are NHWC; convolution kernels are `[kh][kw][cin][cout]`,
//! dense weights are `[in][out]`.

mod conv;
mod dense;
mod dropout;
mod loss;
mod pool;
mod relu;

pub use conv::{conv2d_backward, conv2d_forward, ConvCache};
pub use dense::{dense_backward, dense_forward};
pub use dropout::{dropout_backward, dropout_forward, dropout_mask};
pub use loss::{softmax, softmax_cross_entropy};
pub use pool::{maxpool2x2_backward, maxpool2x2_forward, PoolCache};
pub use relu::{relu_backward, relu_forward};
