"""Lark grammar for PiCore specification files (see docs/grammar.md)."""

GRAMMAR = r"""
    start:          header? symbols? constants? domains init events system rgspecs? invariants?

    header:         "SPEC" NAME
    symbols:        "SYMBOLS" NAME ("," NAME)*
    constants:      "CONSTANTS" const_def+
    const_def:      NAME "=" expr
    domains:        "DOMAINS" var_decl+
    var_decl:       NAME ":" dom
    init:           "INIT" expr
    events:         "EVENTS" event_def+
    event_def:      "EVENT" NAME param_list? "@" NAME when? "THEN" stmts "END"
    param_list:     "[" "]"
                  | "[" NAME ("," NAME)* "]"
    when:           "WHEN" expr
    system:         "SYSTEM" unit_def+
    unit_def:       NAME ":" esys
    rgspecs:        "RGSPECS" rg_entry+
    rg_entry:       NAME ":" rgcond                     -> rg_event
                  | NAME ":" rgcond "FROM" rgcond       -> rg_event
                  | "UNIT" NAME ":" rgcond              -> rg_unit
    rgcond:         "PRE" expr "RELY" expr "GUAR" expr "POST" expr
    invariants:     "INVARIANTS" inv_def+
    inv_def:        NAME ":" expr

    dom:            "BOOL"                              -> dom_bool
                  | "LIST" dom "MAXLEN" INT             -> dom_list
                  | "OPTION" dom                        -> dom_option
                  | "MAP" setexpr "TO" dom              -> dom_map
                  | setexpr                             -> dom_values

    setexpr:        "{" "}"                             -> set_empty
                  | "{" expr ("," expr)* "}"            -> set_enum
                  | "{" expr ".." expr "}"              -> set_range
                  | NAME                                -> set_name

    ?esys:          "{" "}"                             -> esys_set
                  | "{" evt_ref ("," evt_ref)* "}"      -> esys_set
                  | evt_ref ";" esys                    -> esys_seq
    evt_ref:        NAME
                  | NAME "(" param_dom ("," param_dom)* ")"
    param_dom:      NAME ":" setexpr

    stmts:          stmt (";;" annot? stmt)*
    annot:          "{|" expr "|}"
    ?stmt:          NAME ("," NAME)* ":=" expr ("," expr)*      -> assign
                  | "SKIP"                                      -> skip
                  | "IF" expr "THEN" stmts "FI"                 -> if_
                  | "IF" expr "THEN" stmts "ELSE" stmts "FI"    -> if_
                  | "WHILE" expr "DO" stmts "OD"                -> while_
                  | "AWAIT" expr "THEN" stmts "END"             -> await_
                  | "GUARD" expr "THEN" stmts "END"             -> await_
                  | "ATOM" stmts "END"                          -> atom_
                  | "⟨" stmts "⟩"                               -> atom_
                  | "NONDT" expr                                -> nondt

    ?expr:          implication
    ?implication:   disjunction
                  | disjunction "-->" implication       -> implies
    ?disjunction:   conjunction
                  | disjunction "OR" conjunction        -> or_
    ?conjunction:   negation
                  | conjunction "AND" negation          -> and_
    ?negation:      comparison
                  | "NOT" negation                      -> not_
    ?comparison:    listop
                  | listop "=" listop                   -> eq
                  | listop "/=" listop                  -> ne
                  | listop "<" listop                   -> lt
                  | listop "<=" listop                  -> le
                  | listop ">" listop                   -> gt
                  | listop ">=" listop                  -> ge
                  | listop "IN" listop                  -> in_
                  | listop "SUBSET" listop              -> subset
    ?listop:        sum
                  | sum "#" listop                      -> cons
                  | sum "@" listop                      -> append
    ?sum:           product
                  | sum "+" product                     -> add
                  | sum "-" product                     -> sub
    ?product:       prefix
                  | product "*" prefix                  -> mul
    ?prefix:        postfix
                  | "-" prefix                          -> neg
                  | "hd" prefix                         -> hd
                  | "tl" prefix                         -> tl
                  | "len" prefix                        -> len_
                  | "the" prefix                        -> the
                  | "SOME" prefix                       -> some
                  | "is_some" prefix                    -> is_some
    ?postfix:       atom
                  | postfix "[" expr "]"                -> apply
                  | postfix "[" expr ":=" expr "]"      -> update
    ?atom:          INT                                 -> int_lit
                  | "true"                              -> true_lit
                  | "UNIV"                              -> true_lit
                  | "false"                             -> false_lit
                  | "EMPTY"                             -> false_lit
                  | "NONE"                              -> none_lit
                  | "Id"                                -> id_rel
                  | "FRAME" "(" ")"                     -> frame
                  | "FRAME" "(" NAME ("," NAME)* ")"    -> frame
                  | NAME                                -> name
                  | PRIMED                              -> primed
                  | "[" "]"                             -> list_lit
                  | "[" expr ("," expr)* "]"            -> list_lit
                  | "{" "}"                             -> map_lit
                  | "{" map_entry ("," map_entry)* "}"  -> map_lit
                  | "FORALL" NAME "IN" setexpr "." "(" expr ")"   -> forall
                  | "EXISTS" NAME "IN" setexpr "." "(" expr ")"   -> exists
                  | "(" expr ")"
    map_entry:      expr "|->" expr

    PRIMED.2:       /[A-Za-z_][A-Za-z0-9_]*'/
    NAME:           /[A-Za-z_][A-Za-z0-9_]*/
    INT:            /[0-9]+/
    COMMENT:        /--(?!>)[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""
