from setuptools import setup, find_packages


setup(
    name="tanglish",
    version="1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=["numpy", "pandas", "python-dotenv", "regex", "PyYAML", "tqdm"],
    package_data={"tanglish": ["assets/*.txt"]},
    entry_points={"console_scripts": ["tanglish=tanglish.oli.cli:main"]},
)
