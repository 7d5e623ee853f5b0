mod common;

macro_rules! laws {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = common::$name() {
                    panic!("{e}");
                }
            }
        )*
    };
}

laws!(
    converse_is_contravariant,
    converse_is_an_involution,
    composition_distributes_on_the_right,
    composition_distributes_on_the_left,
    converse_is_linear,
    krao_is_bilinear,
    krao_with_bang_is_neutral,
    krao_of_row_vectors_is_hadamard,
    krao_index_is_j_times_q_plus_k,
    tabulation_three_forms,
    pairing_wheel_vector_rules,
    pairing_wheel_rotation,
    conjunction_is_hadamard,
    negation_is_complement,
);
