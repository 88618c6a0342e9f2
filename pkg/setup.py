from pathlib import Path

from setuptools import setup

long_description = (Path(__file__).parent / "README.md").read_text()

version: dict[str, str] = {}
exec((Path(__file__).parent / "mptbench" / "_version.py").read_text(), version)

setup(
    name="mptbench",
    python_requires=">=3.10",
    description=(
        "synthetic multi-phytoplankton tracking benchmarks, trackers and"
        " CLEAR-MOT scoring"
    ),
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=[
        "mptbench",
        "mptbench.synthgen",
        "mptbench.trackers",
        "mptbench.test",
        "mptbench.test.testing_files",
    ],
    package_data={
        "mptbench.test": [
            "testing_files/*.cfg",
            "testing_files/*.json",
            "testing_files/*.txt",
        ]
    },
    entry_points={
        "console_scripts": [
            "mptbench = mptbench.cli:main",
        ]
    },
    license="GPL v3",
    version=version["__version__"],
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "Pillow>=9.5",
        "semantic-version>=2.7",
        "pathvalidate>=2.5",
    ],
    extras_require={
        "test": ["pytest>=7", "coverage>=7"],
    },
)
