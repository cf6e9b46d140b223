"""Package setup for digit-collider."""

from setuptools import setup

setup(
    name="digit-collider",
    version="1.0.0",
    description="Collisions of binary and ternary digit sums",
    license="GPL-3.0-or-later",
    keywords=["sum-of-digits", "number theory", "digital expansions"],
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Programming Language :: Python :: 3.13",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=2,<3",
        "gmpy2>=2.1,<3",
        "sympy>=1.12,<2",
    ],
    extras_require={
        "dev": [
            "black==24.8.0",
            "flake8==7.1.1",
            "mypy==1.14.0",
            "pylint==3.2.7",
            "pytest==8.3.4",
            "build==1.2.2",
        ],
    },
    packages=["digit_collider"],
    package_dir={"": "src"},
    include_package_data=True,
    package_data={"digit_collider": ["py.typed"]},
    entry_points={
        "console_scripts": [
            "collider = digit_collider.__main__:main",
        ]
    },
)
