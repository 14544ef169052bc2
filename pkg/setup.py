# -*- coding: utf-8 -*-
from setuptools import setup

packages = \
['emowave',
 'emowave.classifiers',
 'emowave.cli',
 'emowave.evaluation',
 'emowave.features',
 'emowave.pipeline',
 'emowave.signals',
 'emowave.utils',
 'emowave.wavelets']

package_data = \
{'': ['*'], 'emowave': ['templates/*'], 'emowave.wavelets': ['filters.yml']}

install_requires = \
['Jinja2>=3.0.2,<4.0.0',
 'PyYAML>=6.0,<7.0',
 'click>=8.0.3,<9.0.0',
 'numpy>=1.22,<2.0',
 'pandas>=1.4,<2.0',
 'panaetius>=2.3.2,<3.0.0',
 'pendulum>=2.1.2,<3.0.0']

entry_points = \
{'console_scripts': ['emowave = emowave.cli.cli:main']}

setup_kwargs = {
    'name': 'emowave',
    'version': '1.0.0',
    'description': 'Emotion classification from four-channel EEG with wavelet features, kNN and an RNN.',
    'long_description': '# emowave\n\nEmotion classification from four-channel EEG with wavelet features, kNN and an RNN.\n',
    'author': 'dtomlinson',
    'author_email': 'dtomlinson@panaetius.co.uk',
    'maintainer': None,
    'maintainer_email': None,
    'url': None,
    'packages': packages,
    'package_data': package_data,
    'install_requires': install_requires,
    'entry_points': entry_points,
    'python_requires': '>=3.9,<4.0',
}


setup(**setup_kwargs)
