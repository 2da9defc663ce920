//! The subexpression catalog: every function callable from a rule expression,
//! its event class, and its argument signature.

use super::RuleClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgType {
    Str,
    Int,
    StrSet,
}

#[derive(Debug, Clone, Copy)]
pub struct FuncSig {
    pub class: RuleClass,
    pub args: &'static [ArgType],
}

use ArgType::{Int, Str, StrSet};

macro_rules! sig {
    ($class:ident, $args:expr) => {
        FuncSig {
            class: RuleClass::$class,
            args: $args,
        }
    };
}

/// Looks up a subexpression by name. Returns `None` for unknown functions.
pub fn lookup(name: &str) -> Option<FuncSig> {
    Some(match name {
        // message events
        "topicin" => sig!(Message, &[StrSet]),
        "topicmatches" => sig!(Message, &[Str]),
        "publishercount" => sig!(Message, &[Int, Int]),
        "subscribercount" => sig!(Message, &[Int, Int]),
        "publishersinclude" => sig!(Message, &[StrSet]),
        "subscribersinclude" => sig!(Message, &[StrSet]),
        "publishers" => sig!(Message, &[StrSet]),
        "subscribers" => sig!(Message, &[StrSet]),
        "msgtypein" => sig!(Message, &[StrSet]),
        "msgsubtype" => sig!(Message, &[Str, Str]),
        "plugin" => sig!(Message, &[Str]),
        "payload" => sig!(Message, &[Str]),

        // graph events
        "nodes" => sig!(Graph, &[StrSet]),
        "nodesinclude" => sig!(Graph, &[StrSet]),
        "nodecount" => sig!(Graph, &[Int, Int]),
        "topics" => sig!(Graph, &[StrSet]),
        "topicsinclude" => sig!(Graph, &[StrSet]),
        "topiccount" => sig!(Graph, &[Int, Int]),
        "services" => sig!(Graph, &[Str, StrSet]),
        "servicesinclude" => sig!(Graph, &[Str, StrSet]),
        "servicecount" => sig!(Graph, &[Str, Int, Int]),
        "topicsubscribers" => sig!(Graph, &[Str, StrSet]),
        "topicsubscribersinclude" => sig!(Graph, &[Str, StrSet]),
        "topicsubscribercount" => sig!(Graph, &[Str, Int, Int]),
        "topicpublishers" => sig!(Graph, &[Str, StrSet]),
        "topicpublishersinclude" => sig!(Graph, &[Str, StrSet]),
        "topicpublishercount" => sig!(Graph, &[Str, Int, Int]),

        // external events
        "idsalert" => sig!(External, &[Str]),
        "signal" => sig!(External, &[Str]),

        // class-neutral
        "eval" => sig!(Neutral, &[Str, Str, Str]),

        _ => return None,
    })
}

/// All catalog function names, for generators and documentation.
pub const ALL_FUNCS: &[&str] = &[
    "topicin",
    "topicmatches",
    "publishercount",
    "subscribercount",
    "publishersinclude",
    "subscribersinclude",
    "publishers",
    "subscribers",
    "msgtypein",
    "msgsubtype",
    "plugin",
    "payload",
    "nodes",
    "nodesinclude",
    "nodecount",
    "topics",
    "topicsinclude",
    "topiccount",
    "services",
    "servicesinclude",
    "servicecount",
    "topicsubscribers",
    "topicsubscribersinclude",
    "topicsubscribercount",
    "topicpublishers",
    "topicpublishersinclude",
    "topicpublishercount",
    "idsalert",
    "signal",
    "eval",
];
