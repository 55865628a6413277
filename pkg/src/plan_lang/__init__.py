# Plan language: AST, parser, checks
