"""PiCore concrete syntax: lark grammar, parser and pretty printer."""
