"""Generate CLI docs, including the environment variables each action reads
and the scenario settings `generate` starts from"""
import mkdocs_gen_files

from mptbench import cli
from mptbench.synthgen import ScenarioConfig

ENVIRONMENT = {
    "MPT_ROOT": "The dataset root, when none is given on the command line",
    "MPT_LOG": "The starting verbosity, as a number or a level name",
}


def ini_value(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(map(str, value))
    return str(value)


root_parser, verb_parsers = cli.generate_parsers()

cli_guide = f"""
# Full Command-Line Interface Documentation

## Summary
```bash
{root_parser.format_help()}```

## Environment Variables

| Variable | Meaning |
|---|---|
"""
cli_guide += "".join(
    f"| `{variable}` | {meaning} |\n" for variable, meaning in ENVIRONMENT.items()
)

for verb, parser in verb_parsers.items():
    cli_guide += f"""
## `mptbench {verb}`
```bash
{parser.format_help()}```
"""
    if verb == "generate":
        defaults = "\n".join(
            f"{key.replace('_', '-')} = {ini_value(value)}"
            for key, value in ScenarioConfig().to_section().items()
        )
        cli_guide += f"""
Without `--config`, the benchmark is rendered from these settings:
```ini
[scenario]
{defaults}
```
"""

with mkdocs_gen_files.open("cli.md", "w") as cli_docs:
    cli_docs.write(cli_guide)
