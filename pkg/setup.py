from setuptools import setup, find_packages

with open('README.md', 'r', encoding='utf-8') as f:
    readme = f.read()

setup(name='dksel',
    version='0.1.0',
    description='Diverse top-k selection over embedding pools with Frank-Wolfe',
    long_description=readme,
    long_description_content_type='text/markdown',
    author='dksel developers',
    classifiers=[
    'Programming Language :: Python :: 3',
    'License :: OSI Approved :: Apache Software License',
    'Operating System :: OS Independent',
    ],
    license='Apache 2.0',
    package_dir={'': 'src'},
    packages=find_packages(where='src'),
    python_requires='>=3.9, <4',
    install_requires=[
        'numpy>=1.22',
        'pandas>=1.4',
        'threadpoolctl>=3.0',
    ],
    extras_require={
        'test': ['pytest>=7'],
        'docs': ['sphinx', 'sphinx_rtd_theme'],
    },
    entry_points={
        'console_scripts': ['dksel = dksel.cli:main'],
    },
    keywords='diversity, reranking, retrieval, Frank-Wolfe, MMR, DPP'
)
