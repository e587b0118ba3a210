import os

from setuptools import find_packages, setup

requires = """yacs
loguru
numpy>=1.17
pandas>=1.5
scipy
tqdm>=4.62.2
pyyaml
flask>=2.2
"""


def get_requirements():
    return [line.strip() for line in requires.splitlines() if line.strip()]


with open(os.path.join(os.path.dirname(__file__), "README.md"), encoding="utf-8") as f:
    long_description = f.read()

setup(
    name="burstsim",
    version="0.1.0",
    description="Deterministic discrete-event simulator of HPC clusters bursting into a cloud pool",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="Apache",
    python_requires=">=3.8",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"burstsim": ["resources/*.csv"]},
    install_requires=get_requirements(),
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["burstsim=burstsim.cli:main"]},
    classifiers=[
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Topic :: System :: Distributed Computing",
    ],
)
