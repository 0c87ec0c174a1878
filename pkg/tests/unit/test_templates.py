"""Unit tests for prompt templates."""

import pytest

from llm_coordinator.errors import UnboundPlaceholder
from llm_coordinator.llm.templates import (
    instantiate_prompt,
    load_template,
    parse_template,
    render_prompt,
)

TEMPLATE_NAMES = [
    "actor_feedback",
    "assessor_correction",
    "assessor_revision",
    "assessor_scrutiny",
    "critic_proposal",
    "debate_final",
    "debater",
    "decentralized_actor",
    "grammar_reask",
]

SIMPLE = """# name: greet
# version: 2.1
# placeholders: name, place
[system]
You live in {{place}}.
[user]
Hello {{ name }}!
"""


class TestParseTemplate:
    """Test the template file format."""

    def test_headers_and_sections(self):
        template = parse_template(SIMPLE)

        assert template.name == "greet"
        assert template.version == "2.1"
        assert template.placeholders == ("name", "place")
        assert [speaker for speaker, _ in template.sections] == ["system", "user"]

    def test_undeclared_placeholder_rejected(self):
        with pytest.raises(ValueError):
            parse_template(SIMPLE.replace("# placeholders: name, place", "# placeholders: name"))

    def test_missing_headers_rejected(self):
        with pytest.raises(ValueError):
            parse_template("[user]\nhi\n")

    def test_no_sections_rejected(self):
        with pytest.raises(ValueError):
            parse_template("# name: empty\n# version: 1\n")


class TestInstantiate:
    """Test placeholder substitution."""

    def test_all_bound(self):
        messages = instantiate_prompt(parse_template(SIMPLE), {"name": "agent_0", "place": "cell(0,1)"})

        assert messages == (("system", "You live in cell(0,1)."), ("user", "Hello agent_0!"))

    def test_unbound_placeholder(self):
        with pytest.raises(UnboundPlaceholder) as exc_info:
            instantiate_prompt(parse_template(SIMPLE), {"name": "agent_0"})

        assert exc_info.value.names == ["place"]
        assert exc_info.value.template == "greet"

    def test_values_are_not_re_expanded(self):
        """A bound value containing placeholder syntax stays literal."""
        messages = instantiate_prompt(parse_template(SIMPLE), {"name": "{{place}}", "place": "here"})
        assert messages[1] == ("user", "Hello {{place}}!")


class TestShippedTemplates:
    """Every packaged template parses and is fully declared."""

    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    def test_loads(self, name):
        template = load_template(name)

        assert template.name == name
        assert template.version
        assert template.referenced == template.placeholders

    def test_render_grammar_reask(self):
        messages = render_prompt("grammar_reask", {"error": "missing agent: agent_2", "output_format": "{}"})

        assert len(messages) == 1
        speaker, text = messages[0]
        assert speaker == "user"
        assert "missing agent: agent_2" in text
