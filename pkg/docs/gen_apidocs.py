"""Generate the API reference and the catalog of background presets and
species the generator draws from"""

from pathlib import Path

import mkdocs_gen_files

from mptbench.core import SPECIES
from mptbench.synthgen import PRESETS
from mptbench.synthgen.sprites import nominal_diameter, silhouette_of

PACKAGE = Path("mptbench")

nav = mkdocs_gen_files.Nav()

for path in sorted(PACKAGE.rglob("*.py")):
    if PACKAGE / "test" in path.parents or path.name == "_version.py":
        continue
    if path.name.startswith("_") and path.name != "__init__.py":
        continue

    py_path: tuple[str, ...] = path.with_suffix("").parts
    doc_file_path = Path("reference", *py_path).with_suffix(".md")
    if path.name == "__init__.py":
        py_path = py_path[:-1]
        doc_file_path = doc_file_path.with_name("index.md")

    with mkdocs_gen_files.open(doc_file_path, "w") as doc_file:
        doc_file.write(f":::{'.'.join(py_path)}\n")

    mkdocs_gen_files.set_edit_path(doc_file_path, path)
    nav[py_path] = doc_file_path.relative_to("reference").as_posix()

with mkdocs_gen_files.open("reference/SUMMARY.md", "w") as nav_file:
    nav_file.writelines(nav.build_literate_nav())

with mkdocs_gen_files.open("catalog.md", "w") as catalog:
    catalog.write("# Benchmark Catalog\n\n## Backgrounds\n\n")
    catalog.write("| Label | Family | Brightness | Impurities / Mpx |\n")
    catalog.write("|---|---|---|---|\n")
    for preset in PRESETS:
        catalog.write(
            f"| `{preset.label}` | {preset.family} | {preset.brightness:g}"
            f" | {preset.impurity_density:g} |\n"
        )
    catalog.write("\n## Species\n\n| Class | Name | Silhouette | Diameter (px) |\n")
    catalog.write("|---|---|---|---|\n")
    for species, name in enumerate(SPECIES, start=1):
        catalog.write(
            f"| {species} | {name} | {silhouette_of(species)}"
            f" | {nominal_diameter(species):.0f} |\n"
        )
