"""botprobe: closed-loop simulation testing for task-oriented chatbots.

Pipeline: parse a bot definition into dialog-act maps and a conversation
graph, generate goal-driven test dialogs (optionally with paraphrased intent
queries), simulate them against a connector, then aggregate the episodes into
health reports and remediation suggestions.
"""
from .actmaps import (
    DIALOG_SUCCESS,
    INTENT_SUCCESS,
    DialogActMap,
    Revision,
    apply_revision,
    build_act_maps,
    build_global_maps,
    build_local_maps,
    infer_local_dialog_act,
    infer_success_messages,
)
from .botdef import (
    BotDefinition,
    BotMessage,
    DialogSpec,
    EntitySpec,
    EntityValueType,
    IntentSpec,
    MessageAction,
    Transition,
    convert,
    load_bot_definition,
    register_adaptor,
    validate_definition,
)
from .connectors import BotReply, Connector, HttpConnector
from .goals import Goal, Ontology, apply_overlay, generate_goals, generate_ontology, generate_path_goals
from .graph import ConversationGraph, Path, build_graph, enumerate_simple_paths, nodes_on_terminal_paths
from .mockbot import FaultProfile, MockBotConnector, mock_connector_factory, new_mock_bot
from .nlg import NLGTemplates, render_nlg
from .paraphrase import (
    BuiltinParaphraser,
    FilterConfig,
    ParaphraseCandidate,
    ParaphraseEvalReport,
    RemoteParaphraser,
    evaluate_paraphraser,
    filter_candidates,
    paraphrase,
    paraphrase_ensemble,
    score_candidates,
)
from .remediator import (
    ConfusionMatrix,
    ErrorGroup,
    RemediationConfig,
    RemediationSuggestion,
    SessionReport,
    SuggestionKind,
    aggregate_metrics,
    bootstrap_f1_ci,
    compare_sessions,
    confusion_matrix,
    export_augmented_training,
    group_intent_errors,
    suggest_remediations,
)
from .simulator import (
    Agenda,
    Episode,
    ErrorCause,
    Outcome,
    SessionResult,
    SimConfig,
    Turn,
    UserAct,
    backtrack_root_cause,
    init_agenda,
    match_dialog_act,
    run_episode,
    run_session,
    step,
)
from .textmetrics import TfidfScorer, bleu, fuzz_ratio, ibleu, normalize_text

__version__ = "0.1.0"
