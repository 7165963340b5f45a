"""Python bindings for the artkit C++ core."""

from ._artkit import (
    ArtlangError,
    CompileError,
    EvalError,
    KinematicsError,
    Model,
    RetrievalError,
    UrdfError,
    aggregate,
    chamfer,
    compile_artlang,
    evaluate,
    format_artlang,
    joint_error,
    load_urdf,
    parse_urdf,
    tournament_select,
    wald_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
