import uuid

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='OptimizationRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('scenario_name', models.CharField(max_length=100)),
                ('mode', models.CharField(choices=[('VARIABLE', 'Variable moment arms'), ('CONSTANT', 'Constant moment arms')], max_length=10)),
                ('wires', models.PositiveSmallIntegerField()),
                ('relays', models.PositiveSmallIntegerField(blank=True, null=True)),
                ('gravity', models.BooleanField(default=False)),
                ('seed', models.DecimalField(decimal_places=0, max_digits=20)),
                ('budget', models.PositiveIntegerField()),
                ('population', models.PositiveIntegerField()),
                ('evaluations', models.PositiveIntegerField(default=0)),
                ('config', models.JSONField()),
                ('elapsed_seconds', models.FloatField(default=0.0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='ParetoSolution',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('sample_index', models.PositiveIntegerField()),
                ('e_force', models.FloatField()),
                ('e_velocity', models.FloatField()),
                ('genome', models.JSONField()),
                ('design', models.JSONField()),
                ('is_balanced', models.BooleanField(default=False)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='front', to='optimizer.optimizationrun')),
            ],
            options={
                'ordering': ['e_force', 'e_velocity', 'sample_index'],
                'unique_together': {('run', 'sample_index')},
            },
        ),
    ]
