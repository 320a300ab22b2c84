//! Lexers for Java, C++ and Python sources.
//!
//! Comments and whitespace never become tokens; the lexer instead records
//! which lines any comment touches, which the metric pass needs to classify
//! comment-only lines. Tokens carry their 1-based start line.

use std::collections::BTreeSet;

use super::{Language, Token, TokenKind};

#[derive(Debug)]
pub struct LexError {
    pub line: usize,
    pub message: String,
}

pub struct LexOutput {
    pub tokens: Vec<Token>,
    /// Lines overlapped by comment text, including both delimiter lines of a
    /// block comment.
    pub comment_lines: BTreeSet<usize>,
}

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "false", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "null", "package", "private", "protected", "public", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "true", "try", "void", "volatile", "while",
];

const CPP_KEYWORDS: &[&str] = &[
    "alignas", "alignof", "and", "and_eq", "asm", "auto", "bitand", "bitor", "bool", "break",
    "case", "catch", "char", "char16_t", "char32_t", "char8_t", "class", "compl", "concept",
    "const", "const_cast", "consteval", "constexpr", "constinit", "continue", "decltype",
    "default", "delete", "do", "double", "dynamic_cast", "else", "enum", "explicit", "export",
    "extern", "false", "final", "float", "for", "friend", "goto", "if", "inline", "int", "long",
    "mutable", "namespace", "new", "noexcept", "not", "not_eq", "nullptr", "operator", "or",
    "or_eq", "override", "private", "protected", "public", "register", "reinterpret_cast",
    "requires", "return", "short", "signed", "sizeof", "static", "static_assert", "static_cast",
    "struct", "switch", "template", "this", "thread_local", "throw", "true", "try", "typedef",
    "typeid", "typename", "union", "unsigned", "using", "virtual", "void", "volatile", "wchar_t",
    "while", "xor", "xor_eq",
];

const PYTHON_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

const JAVA_OPERATORS: &[&str] = &[
    ">>>=", ">>>", "<<=", ">>=", "...", "->", "::", "==", "!=", "<=", ">=", "&&", "||", "++",
    "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "+", "-", "*", "/", "%",
    "=", "<", ">", "!", "~", "&", "|", "^", "?", ":", ".", "@",
];

const CPP_OPERATORS: &[&str] = &[
    "<<=", ">>=", "<=>", "->*", "...", "::", "->", ".*", "==", "!=", "<=", ">=", "&&", "||",
    "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "##", "+", "-", "*",
    "/", "%", "=", "<", ">", "!", "~", "&", "|", "^", "?", ":", ".", "#", "@",
];

const PYTHON_OPERATORS: &[&str] = &[
    "**=", "//=", "<<=", ">>=", "->", ":=", "**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "@=", "<<", ">>", "+", "-", "*", "/", "%", "=", "<", ">", "&",
    "|", "^", "~", ":", ".", "@", "!",
];

fn keywords(language: Language) -> &'static [&'static str] {
    match language {
        Language::Java => JAVA_KEYWORDS,
        Language::Cpp => CPP_KEYWORDS,
        Language::Python => PYTHON_KEYWORDS,
    }
}

fn operators(language: Language) -> &'static [&'static str] {
    match language {
        Language::Java => JAVA_OPERATORS,
        Language::Cpp => CPP_OPERATORS,
        Language::Python => PYTHON_OPERATORS,
    }
}

struct Scanner<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    language: Language,
    tokens: Vec<Token>,
    comment_lines: BTreeSet<usize>,
    source: &'a str,
}

impl<'a> Scanner<'a> {
    fn new(source: &'a str, language: Language) -> Self {
        Scanner {
            chars: source.chars().collect(),
            pos: 0,
            line: 1,
            language,
            tokens: Vec::new(),
            comment_lines: BTreeSet::new(),
            source,
        }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn starts_with(&self, pat: &str) -> bool {
        pat.chars().enumerate().all(|(i, c)| self.peek(i) == Some(c))
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied();
        if let Some(c) = c {
            self.pos += 1;
            if c == '\n' {
                self.line += 1;
            }
        }
        c
    }

    fn push(&mut self, kind: TokenKind, text: String, line: usize) {
        self.tokens.push(Token { kind, text, line });
    }

    fn err(&self, line: usize, message: impl Into<String>) -> LexError {
        LexError { line, message: message.into() }
    }

    fn line_comment(&mut self) {
        self.comment_lines.insert(self.line);
        while let Some(c) = self.peek(0) {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    fn block_comment(&mut self) -> Result<(), LexError> {
        let start = self.line;
        self.comment_lines.insert(self.line);
        self.bump();
        self.bump(); // consume "/*"
        loop {
            if self.starts_with("*/") {
                self.comment_lines.insert(self.line);
                self.bump();
                self.bump();
                return Ok(());
            }
            match self.bump() {
                Some('\n') => {
                    self.comment_lines.insert(self.line);
                }
                Some(_) => {
                    self.comment_lines.insert(self.line);
                }
                None => return Err(self.err(start, "unterminated block comment")),
            }
        }
    }

    /// Quoted literal with backslash escapes. `multiline` allows raw
    /// newlines (triple-quoted strings, text blocks).
    fn quoted(&mut self, quote: &str, multiline: bool, kind: TokenKind, prefix: String) -> Result<(), LexError> {
        let start = self.line;
        let mut text = prefix;
        for _ in 0..quote.len() {
            text.push(self.bump().expect("caller checked quote chars"));
        }
        loop {
            if self.starts_with(quote) {
                for _ in 0..quote.len() {
                    text.push(self.bump().unwrap());
                }
                self.push(kind, text, start);
                return Ok(());
            }
            match self.peek(0) {
                Some('\\') => {
                    text.push(self.bump().unwrap());
                    if let Some(c) = self.bump() {
                        text.push(c);
                    }
                }
                Some('\n') if !multiline => {
                    return Err(self.err(start, "unterminated string literal"));
                }
                Some(c) => {
                    text.push(c);
                    self.bump();
                }
                None => return Err(self.err(start, "unterminated string literal")),
            }
        }
    }

    fn number(&mut self) {
        let start = self.line;
        let mut text = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                // Exponent signs: 1e-5, 0x1p+3.
                text.push(c);
                self.bump();
                if (c == 'e' || c == 'E' || c == 'p' || c == 'P')
                    && text.chars().next().is_some_and(|f| f.is_ascii_digit() || f == '.')
                    && matches!(self.peek(0), Some('+') | Some('-'))
                    && self.peek(1).is_some_and(|d| d.is_ascii_digit())
                {
                    text.push(self.bump().unwrap());
                }
            } else {
                break;
            }
        }
        self.push(TokenKind::NumericLiteral, text, start);
    }

    fn identifier(&mut self) -> Result<(), LexError> {
        let start = self.line;
        let mut text = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_alphanumeric() || c == '_' || c == '$' {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }

        // Python string prefixes: r"...", f'...', rb"...".
        if self.language == Language::Python
            && text.len() <= 2
            && text.chars().all(|c| "rbfuRBFU".contains(c))
            && matches!(self.peek(0), Some('"') | Some('\''))
        {
            let quote = self.peek(0).unwrap();
            return self.python_string(quote, text);
        }

        let kind = if keywords(self.language).contains(&text.as_str()) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        self.push(kind, text, start);
        Ok(())
    }

    fn python_string(&mut self, quote: char, prefix: String) -> Result<(), LexError> {
        let triple: String = std::iter::repeat(quote).take(3).collect();
        if self.starts_with(&triple) {
            self.quoted(&triple, true, TokenKind::StringLiteral, prefix)
        } else {
            self.quoted(&quote.to_string(), false, TokenKind::StringLiteral, prefix)
        }
    }

    fn operator_or_punct(&mut self) -> Result<(), LexError> {
        let start = self.line;
        let c = self.peek(0).unwrap();
        if matches!(c, '(' | ')' | '{' | '}' | '[' | ']' | ';' | ',') {
            self.bump();
            self.push(TokenKind::Punctuation, c.to_string(), start);
            return Ok(());
        }
        for op in operators(self.language) {
            if self.starts_with(op) {
                for _ in 0..op.len() {
                    self.bump();
                }
                self.push(TokenKind::Operator, (*op).to_string(), start);
                return Ok(());
            }
        }
        // Unknown character: keep it as a one-character operator so the
        // token stream stays total.
        self.bump();
        self.push(TokenKind::Operator, c.to_string(), start);
        Ok(())
    }

    fn run(mut self) -> Result<LexOutput, LexError> {
        while let Some(c) = self.peek(0) {
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '/' if self.language != Language::Python && self.starts_with("//") => {
                    self.line_comment();
                }
                '/' if self.language != Language::Python && self.starts_with("/*") => {
                    self.block_comment()?;
                }
                '#' if self.language == Language::Python => self.line_comment(),
                '"' => match self.language {
                    Language::Python => self.python_string('"', String::new())?,
                    Language::Java if self.starts_with("\"\"\"") => {
                        // Text block.
                        self.quoted("\"\"\"", true, TokenKind::StringLiteral, String::new())?;
                    }
                    _ => self.quoted("\"", false, TokenKind::StringLiteral, String::new())?,
                },
                '\'' => match self.language {
                    Language::Python => self.python_string('\'', String::new())?,
                    _ => self.quoted("'", false, TokenKind::CharLiteral, String::new())?,
                },
                c if c.is_ascii_digit() => self.number(),
                '.' if self.peek(1).is_some_and(|d| d.is_ascii_digit()) => self.number(),
                c if c.is_alphabetic() || c == '_' || c == '$' => self.identifier()?,
                _ => self.operator_or_punct()?,
            }
        }
        debug_assert!(self.tokens.iter().all(|t| t.line >= 1));
        let _ = self.source;
        Ok(LexOutput { tokens: self.tokens, comment_lines: self.comment_lines })
    }
}

pub fn lex(source: &str, language: Language) -> Result<LexOutput, LexError> {
    Scanner::new(source, language).run()
}
