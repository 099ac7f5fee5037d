"""Reference external evaluator speaking the noisejector wire protocol.

Wraps user-supplied generator/quality/realism hooks around a fixed input
image, or runs a self-contained classical fallback (identity generator,
Laplacian-sharpness quality proxy, constant realism) so the protocol path
is testable without any deep-learning dependency.
"""

from .server import AdapterConfig, serve

__version__ = "0.1.0"

__all__ = ["AdapterConfig", "serve", "__version__"]
