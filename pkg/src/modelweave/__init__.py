"""modelweave: aspect-oriented weaving of class-diagram requirement models."""

from .aspect_model import (
    AddPayload,
    Advice,
    AdviceKind,
    AdviceType,
    AspectModel,
    AspectRequirement,
    DeletePayload,
    NamePattern,
    Pointcut,
    PointcutKind,
    UpdatePayload,
    validate_aspect,
)
from .core_model import (
    AssociationDecl,
    AssociationEnd,
    AttributeDecl,
    ClassDecl,
    CoreModel,
    MethodDecl,
    Multiplicity,
    Parameter,
    QualifiedName,
    Violation,
    qualified_name_of,
    resolve,
    validate_core,
)
from .errors import (
    CapacityError,
    CollisionError,
    ForeignElementError,
    ModelweaveError,
    StaleTargetError,
    UnresolvedConflictError,
    WeaveError,
    WeavingKindError,
)
from .requirements import (
    DecompositionGraph,
    evaluate,
    expression_of,
    is_inferable,
    redundant_crs,
    validate_graph,
)
from .weaver import (
    Conflict,
    ConflictCategory,
    Edit,
    OrderingConstraint,
    WeavePlan,
    WovenModel,
    apply_plan,
    match_pointcut,
    plan_weave,
    resolve_conflicts,
    weave,
    weave_core_additional,
)
from .weaving_model import (
    LinkKind,
    WeavingKind,
    WeavingModel,
    digest_check,
    model_digest,
    validate_weaving,
)

__version__ = "0.1.0"

__all__ = [
    "AddPayload",
    "Advice",
    "AdviceKind",
    "AdviceType",
    "AspectModel",
    "AspectRequirement",
    "DeletePayload",
    "NamePattern",
    "Pointcut",
    "PointcutKind",
    "UpdatePayload",
    "validate_aspect",
    "AssociationDecl",
    "AssociationEnd",
    "AttributeDecl",
    "ClassDecl",
    "CoreModel",
    "MethodDecl",
    "Multiplicity",
    "Parameter",
    "QualifiedName",
    "Violation",
    "qualified_name_of",
    "resolve",
    "validate_core",
    "CapacityError",
    "CollisionError",
    "ForeignElementError",
    "ModelweaveError",
    "StaleTargetError",
    "UnresolvedConflictError",
    "WeaveError",
    "WeavingKindError",
    "DecompositionGraph",
    "evaluate",
    "expression_of",
    "is_inferable",
    "redundant_crs",
    "validate_graph",
    "Conflict",
    "ConflictCategory",
    "Edit",
    "OrderingConstraint",
    "WeavePlan",
    "WovenModel",
    "apply_plan",
    "match_pointcut",
    "plan_weave",
    "resolve_conflicts",
    "weave",
    "weave_core_additional",
    "LinkKind",
    "WeavingKind",
    "WeavingModel",
    "digest_check",
    "model_digest",
    "validate_weaving",
]
