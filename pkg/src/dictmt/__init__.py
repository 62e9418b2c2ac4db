"""Dictionary-assisted prompting toolkit: adapt a chat LLM to an unseen
low-resource language with a bilingual dictionary, a small parallel corpus,
and carefully assembled prompts."""

__version__ = "0.1.0"
