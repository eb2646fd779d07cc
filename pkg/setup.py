from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.split("#")[0].strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="graphwave",
    version="0.1.0",
    author="Jabar42",
    description="Wave equation solvers on weighted graphs with Dirichlet boundary conditions",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=[r for r in requirements if not r.startswith(("pytest", "black"))],
    extras_require={"test": ["pytest>=7.4"]},
    entry_points={
        "console_scripts": [
            "graphwave=src.cli:main",
        ],
    },
)
