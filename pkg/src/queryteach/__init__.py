"""Shared query understanding between agents with different ontologies.

A Teacher that knows which query it wants answered explains it to a
Student with a different ontology using concise grounded examples (one
relevant and one irrelevant common object at a time). The environment
scores the Student's answers and the harness measures how quickly and
cheaply the two agents converge on a shared understanding.
"""

from .corpus import (
    AgentOntology,
    PropertyWeight,
    Triple,
    TripleParseError,
    build_view,
    load_view,
    parse_triples,
    property_weights,
)
from .environment import (
    CycleRecord,
    ExperimentSpec,
    ExperimentTrace,
    Termination,
    TruthScope,
    evaluate,
    ground_truth,
    run_episode,
)
from .grounding import (
    AlignmentRule,
    GroundingMode,
    GroundingModeKind,
    InstanceAlignment,
    align,
    align_extended,
    align_simple,
    common_object_map,
)
from .harness import (
    DatasetBundle,
    RunConfig,
    SuiteResult,
    craft,
    craft_experiments,
    emit_outputs,
    load_bundle,
    parse_manifest,
    run_suite,
)
from .interpretation import Feedback, GroundedExample, Interpretation, interpret, is_clear
from .student import (
    FcaMemory,
    FrequencyState,
    StudentPolicy,
    StudentPolicyKind,
    answer,
    derive_representation,
    memory_metrics,
    new_state,
    observe,
)
from .teacher import (
    ExamplePool,
    ExampleScore,
    PoolExhaustedError,
    TeacherPolicy,
    TeacherPolicyKind,
    UntrainableQueryError,
    build_pool,
    next_example,
    receive_feedback,
    score_example,
)

__version__ = "0.1.0"
