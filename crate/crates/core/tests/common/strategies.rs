use agentloop::distributed::ActionMessage;
use agentloop::{Action, Belief, BeliefBase, BeliefValue, ValueMap};
use proptest::collection::{btree_map, vec};
use proptest::prelude::*;

pub fn key() -> impl Strategy<Value = String> {
    // a small alphabet so generated bases share keys often
    prop_oneof![
        4 => prop::sample::select(vec!["a", "b", "c", "door", "requests", "x.y"]).prop_map(String::from),
        1 => "[a-zA-Z0-9 _@é-]{1,8}",
    ]
}

pub fn value() -> impl Strategy<Value = BeliefValue> {
    let leaf = prop_oneof![
        Just(BeliefValue::Null),
        any::<bool>().prop_map(BeliefValue::Bool),
        any::<i64>().prop_map(BeliefValue::Int),
        any::<f64>()
            .prop_filter("finite", |f| f.is_finite())
            .prop_map(BeliefValue::Float),
        "[ -~é\n\"\\\\]{0,8}".prop_map(BeliefValue::Text),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            vec(inner.clone(), 0..4).prop_map(BeliefValue::from),
            btree_map("[a-z@]{0,4}", inner, 0..4).prop_map(|m: ValueMap| BeliefValue::from(m)),
        ]
    })
}

pub fn belief() -> impl Strategy<Value = Belief> {
    (key(), value(), prop::option::of(-3i64..3))
        .prop_map(|(k, v, p)| Belief::new(k, v, p).expect("generated keys are valid"))
}

pub fn belief_base() -> impl Strategy<Value = BeliefBase> {
    vec(belief(), 0..6).prop_map(BeliefBase::from_iter)
}

/// Belief bases without priorities.
pub fn plain_base() -> impl Strategy<Value = BeliefBase> {
    btree_map(key(), value(), 0..6).prop_map(|m| BeliefBase::from_values(&m).unwrap())
}

pub fn action() -> impl Strategy<Value = Action> {
    prop_oneof![
        "[ -~]{0,8}".prop_map(Action::Token),
        btree_map("[a-zA-Z]{1,6}", value(), 0..3).prop_map(Action::Record),
    ]
}

pub fn action_message() -> impl Strategy<Value = ActionMessage> {
    ("[ -~é]{1,10}", vec(vec(action(), 0..3), 0..3))
        .prop_map(|(id, actions)| ActionMessage::new(id, actions))
}

pub fn token_list() -> impl Strategy<Value = Vec<&'static str>> {
    vec(prop::sample::select(vec!["lock", "unlock"]), 0..5)
}
